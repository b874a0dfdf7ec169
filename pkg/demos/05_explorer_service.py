# The analyst exploration workflow over the HTTP service.
#
# Mirrors what the web explorer does: type into the search bar, pick a
# suggested pattern, then read its related-pattern graph, actor list,
# document list, and usage timeline.  Uses the in-process test client so
# the demo needs no running server; `cape serve` exposes the same
# endpoints over a real socket.

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from cape import SynthConfig, generate
from cape.pipeline import PipelineConfig
from cape.service import create_app

workdir = Path(tempfile.mkdtemp(prefix="cape-demo-"))
generate(SynthConfig(actors=4, patterns_per_actor=2, docs_per_pattern=10,
                     seed=33)).write(workdir)

config = PipelineConfig(corpus_path=str(workdir / "corpus.jsonl"),
                        taxonomy_path=str(workdir / "taxonomy.json"),
                        model="nb", seed=33)
app = create_app(config, build_on_startup=True)
client = TestClient(app)

print("analyst types 'synthetic' into the search bar:")
suggestions = client.get("/suggest", params={"q": "synthetic"}).json()
for s in suggestions["suggestions"][:5]:
    print(f"  {s['id']:<8s} {s['name']:<28s} rank={s['rank']:.2f}")

pattern = suggestions["suggestions"][0]["id"]
print(f"\nanalyst selects {pattern}:")

graph = client.get(f"/patterns/{pattern}/graph").json()
print(f"  graph: medoid={graph['pattern']['medoid']}, "
      f"{len(graph['nodes'])} keywords, {len(graph['related'])} related patterns")

actors = client.get(f"/patterns/{pattern}/actors").json()
print("  actors using the pattern:")
for a in actors["actors"][:3]:
    print(f"    {a['actor']:<10s} score={a['score']:.2f} "
          f"docs={len(a['supporting_docs'])}")

docs = client.get(f"/patterns/{pattern}/documents",
                  params={"limit": 3}).json()
print("  top documents:", [d["doc_id"] for d in docs["documents"]])

timeline = client.get(f"/patterns/{pattern}/timeline").json()
nonzero = [(p, c) for p, c in timeline["periods"] if c]
print(f"  timeline ({timeline['granularity']}): {nonzero}")

print(f"\nall responses came from snapshot build {actors['build_id']}")
