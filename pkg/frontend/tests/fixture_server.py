"""Start an annotation service on a tiny in-memory dataset for tests.

Usage: python3 fixture_server.py PORT [N_VIDEOS]
"""

import sys

import uvicorn

from vidguard.annotation.server import create_app
from vidguard.annotation.store import AnnotationStore
from vidguard.core import Dataset, VideoRecord


def main() -> None:
    port = int(sys.argv[1])
    n_videos = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    dataset = Dataset(
        records=[
            VideoRecord(
                video_id=f"vid{i}",
                title=f"fixture video {i}",
                tags=("cartoon", "song"),
                description=f"description {i}",
            )
            for i in range(n_videos)
        ]
    )
    store = AnnotationStore(dataset)
    uvicorn.run(create_app(store), host="127.0.0.1", port=port, log_level="error")


if __name__ == "__main__":
    main()
