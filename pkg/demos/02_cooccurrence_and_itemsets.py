# The keyword co-occurrence graph and FP-growth itemset mining.
#
# Two keywords are linked when they appear in the same document; the edge
# strength sigma counts such documents.  The same transactions can be fed
# to the FP-growth miner to list every frequently co-occurring keyword
# set, not just pairs.

from cape import Corpus, KeywordRanker, build_graph, mine_frequent_itemsets

corpus = Corpus()
for doc_id, text in [
    ("d1", "phishing attachment macro payload"),
    ("d2", "phishing attachment payload"),
    ("d3", "phishing lure attachment"),
    ("d4", "exploit vulnerability server"),
    ("d5", "exploit server webshell"),
]:
    corpus.ingest({"id": doc_id, "text": text})
corpus.seal()

scores = KeywordRanker(corpus, min_df=1).all_scores()
graph = build_graph(corpus, sorted(scores))

print("edges (source, target, sigma):")
for s, t, sigma in graph.edge_rows():
    print(f"  {s:<14s} {t:<14s} {sigma}")

print("\nneighbors of 'phishing':", sorted(graph.neighbors("phishing")))

transactions = [set(doc.tokens) for doc in corpus.documents()]
print("\nfrequent keyword sets (support >= 2):")
for itemset in mine_frequent_itemsets(transactions, min_support=2):
    print(f"  {'+'.join(itemset.sorted_items()):<40s} support={itemset.support}")
