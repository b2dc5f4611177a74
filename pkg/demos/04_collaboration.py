"""Two clients editing one annotation layer through the collab service.

Starts an in-process service on ephemeral ports, connects a curator and a
contributor, and walks the interesting cases: concurrent edits where one
side loses and retries on the fresh version, a viewer-style rejection
(the contributor trying to commit), the curator freezing the layer, and
both clients ending on the same state hash. Everything travels over the
real TCP protocol, not in-memory shortcuts.
"""
import tempfile
from pathlib import Path

from cloudatelier.collab import CollabClient, CollabService, config_from_obj
from cloudatelier.measure import new_series
from cloudatelier.measure.jsonio import series_to_obj

LAYER = "0f5a3a6e-0f53-49b8-9a3e-2b7c4d9e1f00"


def main():
    with tempfile.TemporaryDirectory() as scratch:
        cfg = config_from_obj({
            "projectId": "yard",
            "dataDir": str(Path(scratch) / "yard"),
            "users": [
                {"name": "ana", "token": "t-ana", "role": "curator"},
                {"name": "bo", "token": "t-bo", "role": "contributor"},
            ],
        }, base_dir=Path(scratch))
        Path(cfg.data_dir).mkdir(parents=True)

        with CollabService([cfg]) as svc:
            print(f"service up: collab port {svc.collab_port}, "
                  f"tile port {svc.http_port}")
            ana = CollabClient("127.0.0.1", svc.collab_port, "yard", "t-ana")
            bo = CollabClient("127.0.0.1", svc.collab_port, "yard", "t-bo")
            print(f"connected: {ana.user} ({ana.role}), "
                  f"{bo.user} ({bo.role})")

            bo.send_op("createLayer", LAYER, payload={"name": "stockpiles"})
            s = new_series("distance", [(0, 0, 0), (10, 0, 0)],
                           label="pile width")
            bo.send_op("createSeries", LAYER, s.id, payload=series_to_obj(s))
            ana.sync(until_seq=2)

            # concurrent update: both edit from version 1, one must lose
            obj = series_to_obj(s)
            obj["version"] = 2
            obj["label"] = "pile width (ana)"
            won = ana.send_op("updateSeries", LAYER, s.id, payload=obj,
                              base_version=1)
            obj["label"] = "pile width (bo)"
            lost = bo.send_op("updateSeries", LAYER, s.id, payload=obj,
                              base_version=1)
            print(f"\nana's update: {won['status']} at seq {won['seq']}")
            err = lost["error"]
            print(f"bo's update:  rejected ({err['code']}), server offers "
                  f"version {err['current']['version']}")

            # bo retries against what the server sent back
            fresh = dict(err["current"])
            fresh["version"] += 1
            fresh["label"] = "pile width (bo, rebased)"
            retry = bo.send_op("updateSeries", LAYER, s.id, payload=fresh,
                               base_version=err["current"]["version"])
            print(f"bo's rebase:  {retry['status']} at seq {retry['seq']}")

            out = bo.send_op("commitLayer", LAYER)
            print(f"\nbo tries to commit: {out['error']['code']} "
                  "(curators only)")
            out = ana.send_op("commitLayer", LAYER)
            print(f"ana commits: {out['status']} at seq {out['seq']}")

            ana.sync(until_seq=out["seq"])
            bo.sync(until_seq=out["seq"])
            assert ana.state_hash() == bo.state_hash()
            print(f"\nboth replicas converged: {ana.state_hash()[:16]}...")

            ana.close()
            bo.close()


if __name__ == "__main__":
    main()
