"""Convert a directory of QM9 ``.xyz`` files to raggednn JSONL.

Each record keeps the atom positions, one-hot element features over
H, C, N, O, F and the ``homo``, ``lumo`` and ``gap`` targets converted from
Hartree to eV. Edges are left empty; training configs set ``dataset.cutoff``
to build them from the positions.

    python scripts/qm9_xyz_to_jsonl.py --dir dsgdb9nsd --out data/qm9.jsonl --limit 1000
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from raggednn.datasets import GraphRecord, dump_jsonl_dataset
from raggednn.exceptions import DataFormatError
from raggednn.log import get_logger, setup_logging

logger = get_logger(__name__)

HARTREE_TO_EV = 27.211386245988
ELEMENTS = ["H", "C", "N", "O", "F"]
TARGETS = ["homo", "lumo", "gap"]
# column of each target on the property line, after the "gdb <index>" tag
TARGET_COLUMNS = {"homo": 7, "lumo": 8, "gap": 9}


def _float(token: str) -> float:
    # QM9 writes some exponents in Mathematica form, e.g. 1.2*^-6
    return float(token.replace("*^", "e"))


def parse_xyz(path: Path) -> GraphRecord:
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        count = int(lines[0])
        props = lines[1].split()
        atoms = [line.split() for line in lines[2 : 2 + count]]
        symbols = [atom[0] for atom in atoms]
        positions = np.array([[_float(t) for t in atom[1:4]] for atom in atoms])
        targets = [_float(props[TARGET_COLUMNS[name]]) * HARTREE_TO_EV for name in TARGETS]
    except (IndexError, ValueError) as e:
        raise DataFormatError(2, f"{path.name}: {e}") from e
    unknown = sorted(set(symbols) - set(ELEMENTS))
    if unknown:
        raise DataFormatError(3, f"{path.name}: unknown element(s) {unknown}")
    features = np.eye(len(ELEMENTS))[[ELEMENTS.index(s) for s in symbols]]
    return GraphRecord(
        id=path.stem,
        node_features=features,
        edge_index=np.zeros((0, 2), dtype=np.int64),
        positions=positions,
        targets=targets,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dir", required=True, type=Path)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--limit", type=int, default=None, help="keep only the first N molecules")
    args = parser.parse_args()
    setup_logging()

    files = sorted(args.dir.glob("*.xyz"))[: args.limit]
    records = [parse_xyz(path) for path in files]
    dump_jsonl_dataset(records, args.out, TARGETS)
    logger.info("dataset_written", path=str(args.out), molecules=len(records))


if __name__ == "__main__":
    main()
