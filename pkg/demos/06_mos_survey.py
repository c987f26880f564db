# Stand up the MOS rating service on a synthetic session, submit ratings
# through the JSON API exactly the way the browser UI does, and export the
# CSV for the evaluation harness.

import csv
import json
import tempfile
import threading
import urllib.request
from pathlib import Path

import numpy as np

from survx.harness import aggregate_mos, ingest_mos
from survx.image import ImageTensor, save_image
from survx.server import make_server

data_dir = Path(tempfile.mkdtemp(prefix="survx_mos_"))
rng = np.random.default_rng(0)
rows = []
for i in range(6):
    name = f"frame{i}.png"
    save_image(data_dir / name, ImageTensor(rng.random((1, 32, 32))))
    rows.append({"image_id": f"frame{i}", "method_id": ("bicubic", "espcn")[i % 2],
                 "path": name})
with open(data_dir / "manifest.csv", "w", newline="") as fh:
    w = csv.DictWriter(fh, ["image_id", "method_id", "path"])
    w.writeheader()
    w.writerows(rows)

httpd = make_server(data_dir, port=0, seed=0)
threading.Thread(target=httpd.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{httpd.server_address[1]}"
print(f"serving {len(rows)} images at {base}")

with urllib.request.urlopen(f"{base}/api/session?rater_id=demo") as resp:
    session = json.loads(resp.read())
print("shuffled queue:", [im["image_id"] for im in session["images"]])

for k, item in enumerate(session["images"]):
    body = json.dumps({"rater_id": "demo", **item, "score": 1 + k % 5}).encode()
    req = urllib.request.Request(f"{base}/api/rating", data=body,
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as resp:
        assert resp.status == 201

with urllib.request.urlopen(f"{base}/api/export") as resp:
    exported = resp.read().decode()
records = ingest_mos(exported)
agg = aggregate_mos(records)
print(f"exported {len(records)} ratings; per-method means:")
for method, stats in agg.per_method.items():
    print(f"  {method:8s} mean={stats['mean']:.2f} n={stats['n']}")

httpd.shutdown()
httpd.server_close()
