"""Write the seeded synthetic datasets the sample configs train on.

    python scripts/make_synthetic.py --out data
"""

from __future__ import annotations

import argparse
from pathlib import Path

from raggednn.datasets import (
    dump_jsonl_dataset,
    random_labeled_graphs,
    random_molecule_records,
    stochastic_block_record,
)
from raggednn.datasets.synthetic import MOLECULE_TARGETS
from raggednn.log import get_logger, setup_logging

logger = get_logger(__name__)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("data"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--molecules", type=int, default=1000)
    args = parser.parse_args()
    setup_logging()

    outputs = {
        "sbm.jsonl": ([stochastic_block_record(seed=args.seed)], None),
        "mutag_subset.jsonl": (random_labeled_graphs(20, seed=args.seed), None),
        "qm9_subset.jsonl": (
            random_molecule_records(args.molecules, seed=args.seed),
            MOLECULE_TARGETS,
        ),
    }
    for name, (records, target_names) in outputs.items():
        path = dump_jsonl_dataset(records, args.out / name, target_names)
        logger.info("dataset_written", path=str(path), graphs=len(records))


if __name__ == "__main__":
    main()
