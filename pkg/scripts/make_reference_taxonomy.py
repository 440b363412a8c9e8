"""Regenerate the packaged reference taxonomy CSV from the programmatic
catalog definition.  Run from the repository root:

    python scripts/make_reference_taxonomy.py
"""

from pathlib import Path

from privacy_profiles.corpus import reference_catalog, write_taxonomy


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "privacy_profiles" / "data" / "taxonomy_reference.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    catalog = reference_catalog()
    write_taxonomy(catalog, out)
    print(f"wrote {catalog.width} questions -> {out}")


if __name__ == "__main__":
    main()
