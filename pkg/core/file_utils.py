import logging
import os
from pathlib import Path

import chardet

logger = logging.getLogger(__name__)


def normalize_path(file_path):
    """Absolute form of a user-supplied output path"""
    try:
        return str(Path(file_path).expanduser().absolute())
    except Exception as e:
        logger.warning("Error normalizing path %s: %s", file_path, e)
        return str(file_path)


def read_file_with_auto_encoding(file_path):
    """Read a text file, detecting its encoding first; returns (content, error)"""
    try:
        with open(file_path, 'rb') as f:
            raw_data = f.read()
        result = chardet.detect(raw_data)
        encoding = result['encoding'] or 'utf-8'
        # chardet reports plain ASCII for most config files; utf-8 is a superset
        if encoding.lower() == 'ascii':
            encoding = 'utf-8'
        return raw_data.decode(encoding), None
    except Exception as e:
        return None, str(e)


def write_file_with_encoding(file_path, content, encoding='utf-8'):
    """Write text with LF line endings, creating parent folders; returns (ok, error)"""
    try:
        parent = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(parent, exist_ok=True)
        with open(file_path, 'w', encoding=encoding, newline='\n') as f:
            f.write(content)
        return True, None
    except Exception as e:
        return False, str(e)


def sibling_path(file_path, suffix):
    """Same path with a different extension, e.g. results.csv -> results.svg"""
    return str(Path(file_path).with_suffix(suffix))
