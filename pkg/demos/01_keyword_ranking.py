# Keyword ranking on a handful of CTI-style reports.
#
# Every report is tokenized deterministically (lowercase, hyphen splits,
# CVE identifiers kept whole, stop words dropped), then each term gets a
# score: in-document frequency x document-frequency factor x a rarity
# weight that damps terms seen in fewer than `min_df` reports.

from cape import Corpus, KeywordRanker

reports = [
    ("r1", "Mimikatz dumped credentials from LSASS memory on the host."),
    ("r2", "Spear-phishing email carried a malicious attachment."),
    ("r3", "The actor exploited CVE-2017-1000486 on a public-facing server."),
    ("r4", "Credentials were reused; mimikatz traces found again."),
    ("r5", "Another spear phishing lure with a weaponized attachment."),
]

corpus = Corpus()
for doc_id, text in reports:
    corpus.ingest({"id": doc_id, "text": text})
corpus.seal()

print(f"{corpus.corpus_size()} documents, {len(corpus.vocabulary())} terms")
print("tokens of r3:", corpus.document("r3").tokens)

ranker = KeywordRanker(corpus, min_df=2)
print("\ntop keywords (literal document-frequency mode):")
for score in ranker.top_keywords(8):
    print(f"  {score.term:<20s} total={score.total_score:.4f} "
          f"df={score.doc_frequency} rarity={score.rarity_weight:.2f}")

# The classic mode damps ubiquitous words instead of boosting them.
classic = KeywordRanker(corpus, min_df=2, idf_mode="classic")
print("\nsame corpus, classic smoothed idf:")
for score in classic.top_keywords(5):
    print(f"  {score.term:<20s} total={score.total_score:.4f}")
