"""
File and fingerprint helpers shared by the workflow and the serializers.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

from loguru import logger


PathLike = Union[str, Path]


class IOTools:
    """Atomic writes and content fingerprints."""

    @staticmethod
    def canonical_json(content: Any, indent: int = 2) -> str:
        """
        Serialize content to JSON deterministically.

        Keys are sorted and floats use their shortest round-trip repr, so equal
        content always yields identical bytes.

        Args:
            content: JSON-compatible content

        Returns:
            JSON text ending with a newline
        """
        return json.dumps(content, indent=indent, sort_keys=True, allow_nan=False) + "\n"

    @staticmethod
    def atomic_write_text(path: PathLike, text: str) -> Path:
        """
        Write text via a temporary file in the same directory, then rename.

        Args:
            path: Destination path
            text: File content

        Returns:
            The destination path
        """
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        logger.debug(f"Wrote {target} ({len(text)} chars)")
        return target

    @staticmethod
    def atomic_write_json(path: PathLike, content: Any) -> Path:
        """Write content as canonical JSON, atomically."""
        return IOTools.atomic_write_text(path, IOTools.canonical_json(content))

    @staticmethod
    def read_json(path: PathLike) -> Any:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)

    @staticmethod
    def fingerprint(content: Any) -> str:
        """
        Stable sha256 fingerprint of JSON-compatible content.

        Args:
            content: JSON-compatible content

        Returns:
            Hex digest
        """
        payload = json.dumps(content, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @staticmethod
    def sha256_file(path: PathLike) -> str:
        digest = hashlib.sha256()
        with open(path, "rb") as handle:
            for chunk in iter(lambda: handle.read(65536), b""):
                digest.update(chunk)
        return digest.hexdigest()
