#!/usr/bin/env python3
"""Download the BPI Challenge 2012 event log into data/.

The log is published at DOI 10.4121/uuid:3926db30-f712-4394-aebc-75976070e91f
(4TU.ResearchData). This script tries the direct file URL; if the mirror is
unreachable, download the .xes.gz manually from the DOI landing page and
place it at data/BPI_Challenge_2012.xes.gz, or point TEMPOGRAPH_BPIC2012 at
wherever it lives.
"""

import sys
import urllib.error
import urllib.request
from pathlib import Path

URL = (
    "https://data.4tu.nl/file/"
    "533f66a4-8911-4ac7-8612-1235d65d1f37/3276db7f-8bee-4f2b-88ee-92dbffb5a893"
)
TARGET = Path(__file__).resolve().parent.parent / "data" / "BPI_Challenge_2012.xes.gz"


def main() -> int:
    if TARGET.is_file():
        print(f"already present: {TARGET}")
        return 0
    TARGET.parent.mkdir(parents=True, exist_ok=True)
    print(f"fetching {URL}")
    try:
        with urllib.request.urlopen(URL, timeout=120) as response:
            payload = response.read()
    except (urllib.error.URLError, OSError) as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        print(
            "fetch the log manually via DOI "
            "10.4121/uuid:3926db30-f712-4394-aebc-75976070e91f "
            f"and save it as {TARGET}",
            file=sys.stderr,
        )
        return 1
    TARGET.write_bytes(payload)
    print(f"wrote {len(payload)} bytes to {TARGET}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
