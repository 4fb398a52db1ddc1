"""
From raw tags to word similarity
================================

Tags scraped for an image are messy. This walk-through cleans them and then
asks how close two words are according to several embedding tables at once.
"""
import numpy as np

from tagsem import EmbeddingEnsemble, EmbeddingTable, RawTagRecord, preprocess
from tagsem.embeddings import averaged_similarity, cosine

##############################################################################
# Cleaning a tag list
# -------------------
# Punctuation goes, dashes split words, anything carrying a digit is dropped.
# Repeated tags keep their multiplicity.

raw = RawTagRecord("img1", "library", ("Old-Books!", "books", "#shelf", "2019", "reading room"))
doc = preprocess(raw)
print(doc.tags)

##############################################################################
# Two tiny embedding tables
# -------------------------
# The second table has never seen "shelf", so the pair (shelf, library) is
# averaged over the first table alone.

rng = np.random.default_rng(0)
words = ["library", "books", "old", "shelf", "reading", "room"]
first = EmbeddingTable.from_dict("first", {w: rng.standard_normal(8) for w in words})
second = EmbeddingTable.from_dict("second", {w: rng.standard_normal(8) for w in words if w != "shelf"})
ens = EmbeddingEnsemble((first, second))

print(cosine(first["books"], first["library"]))
for w in words:
    print(w, averaged_similarity(ens, w, "library"))

##############################################################################
# Words nobody knows have no similarity at all, rather than zero.

print(averaged_similarity(ens, "zebra", "library"))
