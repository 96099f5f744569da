import hashlib
import os
import tempfile
from urllib.request import urlretrieve

from src.errors import MsmTreeError
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)


def file_sha256(file_path: str) -> str:
    digest = hashlib.sha256()
    with open(file_path, 'rb') as fp:
        for block in iter(lambda: fp.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def fetch_dataset(url: str, sha256: str | None = None, target_dir: str | None = None) -> str:
    """
    Downloads a dataset file and returns its local path.
    :param url: The URL of the file to download.
    :param sha256: Expected hex digest; a mismatch removes the file and raises.
    :param target_dir: Where to store it; a fresh temporary directory when omitted.
    """
    target_dir = target_dir or tempfile.mkdtemp()
    os.makedirs(target_dir, exist_ok=True)
    filename = os.path.join(target_dir, os.path.basename(url))
    try:
        urlretrieve(url, filename)
    except OSError as error:
        logger.error("Failed to download '%s': %s", url, error)
        raise MsmTreeError(f"download failed for {url}: {error}") from error

    if sha256 is not None:
        actual = file_sha256(filename)
        if actual != sha256.lower():
            os.remove(filename)
            raise MsmTreeError(f"checksum mismatch for {url}: expected {sha256}, got {actual}")
    logger.info("Fetched '%s' to '%s'", url, filename)
    return filename
