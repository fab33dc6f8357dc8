""" Utilities shared by the engine, the ensemble runner and the harness. """
import os
import hashlib
import logging

# create a logger for this module
log = logging.getLogger(__name__)

WORKERS_ENV = 'DYNELAB_WORKERS'


def default_workers():
    '''
    :return: worker count from $DYNELAB_WORKERS, else the CPU count
    '''
    value = os.environ.get(WORKERS_ENV)
    if value:
        try:
            workers = int(value)
        except ValueError:
            log.warning("Ignoring {e}={v!r}, not an integer".format(
                e=WORKERS_ENV, v=value))
        else:
            if workers >= 1:
                return workers
            log.warning("Ignoring {e}={v!r}, must be >= 1".format(
                e=WORKERS_ENV, v=value))
    return os.cpu_count() or 1


def blocks(items, size):
    '''
    :param items: sequence to cut
    :param size: block length (the last block may be shorter)
    :return: list of consecutive slices of ``items``
    '''
    if size < 1:
        raise ValueError('block size must be >= 1, got {s}'.format(s=size))
    return [items[start:start + size] for start in range(0, len(items), size)]


def file_checksum(path, algorithm='sha256'):
    '''
    :param path: file to hash
    :return: hex digest of the file content
    '''
    digest = hashlib.new(algorithm)
    with open(path, 'rb') as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()
