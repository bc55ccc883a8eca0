"""Class counts of all decision matrices for every size with mx * my <= 16."""

import json

from dhtbits.decoder_algebra import enumerate_classify


def main() -> None:
    rows = []
    for mx in range(1, 17):
        for my in range(1, mx + 1):
            if mx * my > 16:
                continue
            tally = enumerate_classify(mx, my)
            rows.append({"mx": mx, "my": my, **tally})
            print(mx, my, dict(tally))
    with open("decoder_classes.json", "w") as fh:
        json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
