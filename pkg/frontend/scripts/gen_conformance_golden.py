"""Regenerate the client conformance golden from the server-side extractor.

The browser client's scan must agree with the server-side extractor on the
shared HTML fixture pages; this script freezes the extractor's output so the
client test suite can diff against it without a Python runtime.

Usage: python3 frontend/scripts/gen_conformance_golden.py
"""

import json
from pathlib import Path

from fieldsense.extractor import parse_document, read_url_map

ROOT = Path(__file__).resolve().parents[2]
PAGES = ROOT / "tests" / "fixtures" / "pages"
URL_MAP = ROOT / "tests" / "fixtures" / "urls.txt"
OUT = ROOT / "frontend" / "tests" / "fixtures" / "golden_captures.json"


def main() -> None:
    url_map = read_url_map(URL_MAP)
    golden = {}
    for page in sorted(PAGES.iterdir()):
        url = url_map[page.name]
        records = parse_document(page.read_text(encoding="utf-8"), url)
        golden[page.name] = {
            "url": url,
            "fields": [
                {
                    "label": r.label_text,
                    "name": r.name,
                    "id": r.id,
                    "control_type": r.control_type,
                    "url": r.page_url,
                }
                for r in records
            ],
        }
    OUT.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    total = sum(len(v["fields"]) for v in golden.values())
    print(f"wrote {OUT} ({len(golden)} pages, {total} fields)")


if __name__ == "__main__":
    main()
