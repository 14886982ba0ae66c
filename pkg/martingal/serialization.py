"""
Reading and writing MD-systems, reports and tables.

MD-system files are JSON documents

    {"n": 2, "breakpoints": ["0/1", "1/2", "1/1"],
     "partitions": [[0, 1], [0, 1]], "values": [["1/1", "-1/1"], ...]}

with the level-0 partition left implicit. Rationals are always "num/den"
strings so that a save/load round trip is exact.

"""

import dataclasses
import datetime
import io
import json
import logging
import os.path
from fractions import Fraction
from functools import wraps

import numpy as np

from .exact_measure import format_rational, make_grid, parse_rational, CellLabeling, StepFunction
from .exceptions import ParseError
from .md_system import MDSystem
from . import config

log = logging.getLogger(__name__)


def timed(func):
    """ Decorator logging how long each call of `func` took. """

    @wraps(func)
    def wrapper(*args, **kwargs):
        beginning = datetime.datetime.now()
        try:
            return func(*args, **kwargs)
        finally:
            time_elapsed = datetime.datetime.now() - beginning
            log.info(" *** %s took %s", func.__name__, time_elapsed)

    return wrapper


def system_to_dict(d):

    return {'n': d.n,
            'breakpoints': [format_rational(t) for t in d.grid.breakpoints],
            'partitions': [list(labeling.labels) for labeling in d.partitions],
            'values': [[format_rational(v) for v in f.values] for f in d.differences]}


def _require_list(value, key):
    if not isinstance(value, list):
        raise ParseError("'{0}' must be a JSON array, got {1!r}".format(key, value))


def system_from_dict(doc):
    """
    Builds an MDSystem from its JSON document. Shape problems raise
    ParseError; martingale conditions are left to validate().

    """

    if not isinstance(doc, dict):
        raise ParseError("MD-system document must be a JSON object")
    missing = [key for key in ('n', 'breakpoints', 'partitions', 'values') if key not in doc]
    if missing:
        raise ParseError("MD-system document lacks {0}".format(", ".join(missing)))

    n = doc['n']
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("'n' must be a positive integer, got {0!r}".format(n))
    for key in ('breakpoints', 'partitions', 'values'):
        _require_list(doc[key], key)
    if len(doc['partitions']) != n or len(doc['values']) != n:
        raise ParseError("expected {0} partitions and {0} value rows".format(n))

    def rational(text):
        if not isinstance(text, str):
            raise ParseError("rationals are written as \"num/den\" strings, got {0!r}".format(text))
        return parse_rational(text)

    grid = make_grid([rational(t) for t in doc['breakpoints']])

    partitions = []
    differences = []
    for k, (labels, values) in enumerate(zip(doc['partitions'], doc['values']), start=1):
        _require_list(labels, "partitions[{0}]".format(k - 1))
        _require_list(values, "values[{0}]".format(k - 1))
        if len(labels) != grid.n_atoms or len(values) != grid.n_atoms:
            raise ParseError("level {0} must give one label and one value per atom ({1})".format(k, grid.n_atoms))
        if not all(isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in labels):
            raise ParseError("level {0} cell ids must be nonnegative integers".format(k))
        partitions.append(CellLabeling(labels))
        differences.append(StepFunction(grid, [rational(v) for v in values]))

    return MDSystem(grid, partitions, differences)


def save_system(d, filename):

    with open(filename, 'w') as f:
        json.dump(system_to_dict(d), f, indent=1)

    return None


def load_system(filename):

    with open(filename) as f:
        try:
            doc = json.load(f)
        except ValueError as e:
            raise ParseError("{0} is not JSON: {1}".format(filename, e))

    return system_from_dict(doc)


def jsonable(obj):
    """ Recursively turns reports, Fractions and numpy scalars into JSON-ready values. """

    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, MDSystem):
        return system_to_dict(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if hasattr(obj, 'passed'):
            out['passed'] = obj.passed
        return out
    if isinstance(obj, dict):
        return {str(key): jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def filename_generator(suite=None, p=None, seed=None, trial=None, savepath=None):
    """ Paths of the replay files of one failed trial. """

    if suite is None:
        raise ValueError("`suite` must be provided!")
    if savepath is None:
        savepath = config.violation_path

    if p is None:
        p_str = str(p)
    else:
        p_str = '{:.3f}'.format(p)

    filename_base = "{0}_{1}_{2}_{3}".format(suite, p_str, seed, trial)

    filename_dict = {}
    filename_dict['system'] = os.path.join(savepath, filename_base + "_system.json")
    filename_dict['record'] = os.path.join(savepath, filename_base + "_record.json")

    return filename_dict


def save_replay(d, record, **kwargs):
    """ Writes the offending system and its record so the failure can be replayed. """

    filename_dict = filename_generator(**kwargs)

    save_system(d, filename_dict['system'])
    with open(filename_dict['record'], 'w') as f:
        json.dump(jsonable(record), f, indent=1)

    log.warning("replay files written to %s", filename_dict['system'])
    return filename_dict


def write_table(table, filename=None, format='csv'):
    """
    Writes an astropy Table as CSV (header row first) or as JSON lines.

    Without a filename the text is returned instead.

    """

    if format == 'csv':
        if filename is None:
            buffer = io.StringIO()
            table.write(buffer, format='ascii.csv')
            return buffer.getvalue()
        table.write(filename, format='ascii.csv', overwrite=True)
        return None
    elif format == 'json':
        text = "".join(json.dumps(jsonable({name: row[name] for name in table.colnames})) + "\n"
                       for row in table)
        if filename is None:
            return text
        with open(filename, 'w') as f:
            f.write(text)
        return None
    raise ValueError("unknown table format {0!r}; use 'csv' or 'json'".format(format))
