"""
output_utils.py
====================================
The module used for saving and exporting analysis results.
Every file is written to a temporary file in the target folder first and then moved into place,
so an interrupted run never leaves a partial report behind.
"""
import json
import os
import tempfile
import numpy as np
import yaml


def create_folders(root_folder, settings):
    """
    Creates the folder for the output of a run.

    Parameters
    ----------
    root_folder : str
        path in which the results folder is created
    settings : RunConfig
        the configuration of this run

    Returns
    -------
    folders : dict with str as keys and values
        {'root': root_folder, 'results': path to the results folder}
    """
    folders = {'root': root_folder, 'results': os.path.join(root_folder, settings.output['directory'])}
    for folder_path in folders.values():
        os.makedirs(folder_path, exist_ok=True)
    return folders


def _atomic_write(path, write):
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=folder, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(handle, 'w', encoding='utf-8', newline='') as temp_file:
            write(temp_file)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
    return path


class _ReportEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def report_to_json(report):
    """Deterministic JSON text of a report dictionary."""
    return json.dumps(report, cls=_ReportEncoder, indent=2, sort_keys=True)


def save_json(report, path):
    """Writes a report dictionary as JSON."""
    text = report_to_json(report)
    return _atomic_write(path, lambda f: f.write(text + '\n'))


def save_csv(frame, path):
    """Writes a pandas DataFrame as CSV without the index."""
    return _atomic_write(path, lambda f: frame.to_csv(f, index=False))


def save_settings(settings, path):
    """Writes the validated configuration next to the results."""
    dump = yaml.dump(settings.to_dict(), default_flow_style=False, allow_unicode=True, encoding=None)
    return _atomic_write(path, lambda f: f.write(dump))
