"""Exercise the annotation service end to end, no browser required.

Starts the HTTP service on an ephemeral port with a three-clip roster,
plays three annotators submitting ratings, then reads back progress,
inter-annotator agreement, and the fusion training export.
"""

import tempfile
import threading
from pathlib import Path

import requests

from exprscore import SubScores, save_wav
from exprscore.annotation import AnnotationSession, RatingsStore, RosterClip, make_server
from exprscore.calibration import synth_voice

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    roster = []
    for i in range(3):
        path = tmp / f"clip{i}.wav"
        save_wav(synth_voice(duration_s=1.0, seed=i), path)
        roster.append(
            RosterClip(
                clip_id=f"clip{i}",
                audio_path=str(path),
                subscores=SubScores(55.0 + i, 48.0 + i, 62.0 + i),
            )
        )

    session = AnnotationSession(roster, RatingsStore(tmp / "ratings.log"))
    server = make_server(session, port=0)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = "http://{}:{}".format(*server.server_address)
    print(f"service up at {base}")

    ratings = {"ann1": [5, 4, 2], "ann2": [5, 3, 2], "ann3": [4, 4, 1]}
    for annotator, scores in ratings.items():
        for i, score in enumerate(scores):
            requests.post(
                f"{base}/ratings",
                json={"annotator": annotator, "clip_id": f"clip{i}", "score": score},
            )

    progress = requests.get(f"{base}/clips").json()["progress"]
    print("progress:", progress)
    print("agreement:", requests.get(f"{base}/agreement").json())
    print("export:")
    print(requests.get(f"{base}/export").text)

    server.shutdown()
    server.server_close()
    print("ratings survive restarts; raw log at", tmp / "ratings.log")
