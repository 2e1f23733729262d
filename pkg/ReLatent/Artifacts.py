"""
Atomic writers for the artifacts of a run. Every file starts with a provenance header naming the version, the
command, the seed and the hash of the configuration.
"""
import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from typing import Iterable, Mapping, Sequence

__all__ = ['HASH_EXCLUDED', 'atomic_write', 'config_hash', 'provenance_header', 'write_text_artifact',
           'write_csv_artifact', 'write_jsonl_artifact']

logger = logging.getLogger(__name__)

# Settings that never change results
HASH_EXCLUDED = frozenset({'out', 'print', 'jobs', 'verbose', 'quiet'})


def atomic_write(path: str, text: str) -> None:
    """
    Write text to a temporary file next to path and move it into place.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, 'w', encoding='utf-8', newline='') as file:
            file.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    logger.info('Wrote %s', path)


def config_hash(config: Mapping[str, object]) -> str:
    """
    First 16 hex digits of the SHA-256 of the canonical JSON of all result-relevant settings.
    """
    relevant = {key: value for key, value in config.items() if key not in HASH_EXCLUDED}
    canonical = json.dumps(relevant, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def provenance_header(version: str, command: str, seed: int, hash_value: str) -> str:
    return f'relatent {version} command={command} seed={seed} config={hash_value}'


def write_text_artifact(path: str, header: str, text: str) -> None:
    atomic_write(path, f'% {header}\n{text}')


def write_csv_artifact(path: str, header: str, rows: Iterable[Sequence[object]]) -> None:
    """
    Write rows as CSV. Floats are written with repr so that they read back exactly.
    """
    buffer = io.StringIO()
    buffer.write(f'# {header}\n')
    writer = csv.writer(buffer, lineterminator='\n')
    for row in rows:
        writer.writerow(['' if value is None else repr(value) if isinstance(value, float) else value
                         for value in row])
    atomic_write(path, buffer.getvalue())


def write_jsonl_artifact(path: str, header: Mapping[str, object], records: Iterable[Mapping[str, object]]) -> None:
    lines = [json.dumps({'record': 'header', **header}, sort_keys=True)]
    lines += [json.dumps(record, sort_keys=True) for record in records]
    atomic_write(path, ''.join(line + '\n' for line in lines))
