import os
from pathlib import Path


def locate_dwt_918():
    """Local path of the dwt_918 Matrix Market file, or None.

    The file is not shipped with the repo.  Drop dwt_918.mtx into
    tests/data/ or point SPARSEBENCH_DATA_DIR at a directory containing it
    (it is the NASA structural mesh from the SuiteSparse/Harwell-Boeing
    collection, https://sparse.tamu.edu/HB/dwt_918).
    """
    candidates = []
    env_dir = os.environ.get("SPARSEBENCH_DATA_DIR")
    if env_dir:
        candidates.append(Path(env_dir) / "dwt_918.mtx")
    candidates.append(Path(__file__).parent / "data" / "dwt_918.mtx")
    for path in candidates:
        if path.is_file():
            return path
    return None
