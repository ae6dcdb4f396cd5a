"""Build the retrieval side: load the FHIR corpus, render documents, chunk
them, embed everything with the offline embedder, and run a top-k search.

Run from the repository root:  python demos/02_corpus_retrieval.py
"""
from pathlib import Path

from fhirmap import (
    HashedTrigramEmbedder,
    build_index,
    embed_texts,
    load_corpus,
    render_documents,
    search,
    split_text,
)

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

schema = load_corpus((DATA / "fhir_corpus_sample.jsonl").read_text(encoding="utf-8"), "R5-sample")
print(f"Corpus: {len(schema.resources)} resources, {len(schema.element_docs)} element docs")

documents = render_documents(schema)
print("\nFirst rendered document:")
print(documents[0][1])

chunks = []
for doc_id, text in documents:
    chunks.extend(split_text(text, chunk_size=2000, chunk_overlap=200, doc_id=doc_id))
print(f"\n{len(documents)} documents became {len(chunks)} chunks")

embedder = HashedTrigramEmbedder(dimension=256)
index = build_index(chunks, embed_texts([c.text for c in chunks], embedder))

query = "brain-stem ROI size in mm3"
query_vector = embed_texts([query], embedder)[0]
print(f"\nTop 5 chunks for query {query!r}:")
for hit in search(index, query_vector, k=5):
    print(f"  rank {hit.rank}  similarity {hit.similarity:.4f}  {hit.chunk_id}")
