"""Subprocess worker: replays seeded random workflows and prints CSV digests.

Run as ``python replay_worker.py <seed> <count>``. The parent test invokes
it twice in fresh interpreters and compares the digest lists, which checks
byte-level replay determinism across process boundaries.
"""

import hashlib
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from genutil import random_table, random_workflow  # noqa: E402

from dcflow import replay, table_to_csv  # noqa: E402


def main() -> None:
    seed = int(sys.argv[1])
    count = int(sys.argv[2])
    rng = random.Random(seed)
    digests = []
    for _ in range(count):
        table = random_table(rng, max_rows=8, max_cols=5)
        workflow = random_workflow(rng, table, max_steps=8)
        final = replay(workflow, table).final
        digests.append(hashlib.sha256(table_to_csv(final)).hexdigest())
    print(json.dumps(digests))


if __name__ == "__main__":
    main()
