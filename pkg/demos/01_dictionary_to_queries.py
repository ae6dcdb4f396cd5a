"""Walk through data-dictionary ingestion: parse a table, inspect entries,
and render the retrieval query for each field.

Run from the repository root:  python demos/01_dictionary_to_queries.py
"""
from pathlib import Path

from fhirmap import entry_to_query, parse_dictionary

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

table = (DATA / "adni_dictionary.csv").read_text(encoding="utf-8")
print("Raw dictionary table:")
print(table)

dictionary = parse_dictionary(table)
print(f"Parsed dataset {dictionary.dataset_name!r} with {len(dictionary.entries)} fields.\n")

for entry in dictionary.entries[:3]:
    print(f"--- query for {entry.field_name} ---")
    print(entry_to_query(entry))
    print()

# coded values, when a dictionary carries them, are appended to the query
from fhirmap import DictionaryEntry

coded = DictionaryEntry("ADNI", "PTGENDER", "participant sex", (("1", "Male"), ("2", "Female")))
print("--- query for a field with coded values ---")
print(entry_to_query(coded))
