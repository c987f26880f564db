import csv
import json
import threading
import urllib.error
import urllib.request

import pytest

from conftest import smooth_image
from survx.errors import BadManifest
from survx.harness import aggregate_mos, ingest_mos
from survx.image import save_image
from survx.server import SessionStore, make_server


def build_data_dir(tmp_path, n_images=15):
    data = tmp_path / "mosdata"
    data.mkdir()
    rows = []
    for i in range(n_images):
        name = f"img{i:02d}.png"
        save_image(data / name, smooth_image(seed=i, channels=1, height=12, width=12))
        method = "espcn" if i % 2 else "bicubic"
        rows.append({"image_id": f"img{i:02d}", "method_id": method, "path": name})
    with open(data / "manifest.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, ["image_id", "method_id", "path"])
        w.writeheader()
        w.writerows(rows)
    return data


@pytest.fixture
def server(tmp_path):
    data = build_data_dir(tmp_path)
    httpd = make_server(data, port=0, seed=7)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, data
    httpd.shutdown()
    httpd.server_close()


def get_json(url):
    with urllib.request.urlopen(url) as resp:
        return resp.status, json.loads(resp.read())


def post_json(url, doc):
    req = urllib.request.Request(url, data=json.dumps(doc).encode(),
                                 headers={"Content-Type": "application/json"},
                                 method="POST")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


class TestSessionApi:
    def test_session_queue_complete(self, server):
        base, _ = server
        status, doc = get_json(f"{base}/api/session?rater_id=alice")
        assert status == 200
        assert len(doc["images"]) == 15
        assert doc["scale_labels"]["1"] == "Bad"
        assert doc["scale_labels"]["5"] == "Excellent"

    def test_shuffle_is_per_rater_and_stable(self, server):
        base, _ = server
        _, a1 = get_json(f"{base}/api/session?rater_id=alice")
        _, a2 = get_json(f"{base}/api/session?rater_id=alice")
        _, b1 = get_json(f"{base}/api/session?rater_id=bob")
        assert a1["images"] == a2["images"]
        assert a1["images"] != b1["images"]
        assert sorted(i["image_id"] for i in a1["images"]) == \
            sorted(i["image_id"] for i in b1["images"])

    def test_missing_rater_id(self, server):
        base, _ = server
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(f"{base}/api/session")
        assert err.value.code == 400

    def test_image_bytes_served(self, server):
        base, data = server
        with urllib.request.urlopen(f"{base}/api/image/img03") as resp:
            assert resp.status == 200
            assert resp.read() == (data / "img03.png").read_bytes()

    def test_unknown_image_404(self, server):
        base, _ = server
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(f"{base}/api/image/ghost")
        assert err.value.code == 404

    def test_fallback_page(self, server):
        base, _ = server
        with urllib.request.urlopen(f"{base}/") as resp:
            assert b"MOS rating service" in resp.read()


class TestRatings:
    def test_valid_rating_appends_one_line(self, server):
        base, data = server
        status, _ = post_json(f"{base}/api/rating",
                              {"rater_id": "alice", "image_id": "img00",
                               "method_id": "bicubic", "score": 4})
        assert status == 201
        lines = (data / "ratings.jsonl").read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["score"] == 4

    def test_duplicate_409_file_unchanged(self, server):
        base, data = server
        body = {"rater_id": "alice", "image_id": "img01",
                "method_id": "espcn", "score": 5}
        assert post_json(f"{base}/api/rating", body)[0] == 201
        before = (data / "ratings.jsonl").read_bytes()
        assert post_json(f"{base}/api/rating", body)[0] == 409
        assert (data / "ratings.jsonl").read_bytes() == before

    def test_score_validation(self, server):
        base, _ = server
        for bad in (0, 6, "3", None, True):
            status, _ = post_json(f"{base}/api/rating",
                                  {"rater_id": "r", "image_id": "img00",
                                   "method_id": "bicubic", "score": bad})
            assert status == 400

    def test_unknown_pair_rejected(self, server):
        base, _ = server
        status, _ = post_json(f"{base}/api/rating",
                              {"rater_id": "r", "image_id": "img00",
                               "method_id": "espcn", "score": 3})
        assert status == 400

    def test_full_session_export_ingests(self, server):
        base, _ = server
        _, session = get_json(f"{base}/api/session?rater_id=carol")
        for k, item in enumerate(session["images"]):
            status, _ = post_json(f"{base}/api/rating",
                                  {"rater_id": "carol", **item, "score": 1 + k % 5})
            assert status == 201
        with urllib.request.urlopen(f"{base}/api/export") as resp:
            text = resp.read().decode()
        records = ingest_mos(text)
        assert len(records) == 15
        agg = aggregate_mos(records)
        assert sum(stats["n"] for stats in agg.per_method.values()) == 15

    def test_resume_reports_rated(self, server):
        base, _ = server
        post_json(f"{base}/api/rating", {"rater_id": "dan", "image_id": "img02",
                                         "method_id": "bicubic", "score": 2})
        _, doc = get_json(f"{base}/api/session?rater_id=dan")
        assert doc["rated"] == ["img02:bicubic"]


class TestStore:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(BadManifest):
            SessionStore(tmp_path)

    def test_missing_image_file(self, tmp_path):
        (tmp_path / "manifest.csv").write_text(
            "image_id,method_id,path\nx,m,gone.png\n")
        with pytest.raises(BadManifest):
            SessionStore(tmp_path)

    def test_ratings_survive_restart(self, tmp_path):
        data = build_data_dir(tmp_path, n_images=2)
        store = SessionStore(data)
        assert store.append_rating({"rater_id": "r", "image_id": "img00",
                                    "method_id": "bicubic", "score": 3})
        reloaded = SessionStore(data)
        assert not reloaded.append_rating({"rater_id": "r", "image_id": "img00",
                                           "method_id": "bicubic", "score": 3})
