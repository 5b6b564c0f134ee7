"""
csv_post_process.py
====================================
The module for post processing the curvature reports.
Flattens the per-sample frame components of a report into a long table (one row per sample and component)
and exports it as csv.
"""
import os
import pandas as pd
from SasakiLift.input_output.output_utils import save_csv


def report_to_frame(report):
    """
    Long table of a curvature report.

    Parameters
    ----------
    report : dict
        a CurvatureReport as dictionary (CurvatureReport.to_dict)

    Returns
    -------
    frame : pandas dataframe
        columns: x, y, u, r, component, value (real components), value_imag
    """
    rows = []
    for sample in report['samples']:
        base = {key: sample[key] for key in ('x', 'y', 'u', 'r')}
        for component, (re, im) in sample['ric'].items():
            rows.append({**base, 'component': f'ric{component}', 'value': re, 'value_imag': im})
        rows.append({**base, 'component': 'phi', 'value': sample['phi'], 'value_imag': 0.0})
        for key in ('d0', 'd1', 'psi2'):
            re, im = sample[key]
            rows.append({**base, 'component': key, 'value': re, 'value_imag': im})
    return pd.DataFrame(rows, columns=['x', 'y', 'u', 'r', 'component', 'value', 'value_imag'])


def make_residual_csv(report, folder, filename='residuals'):
    """
    Saves the long table of a report as <folder>/<filename>.csv.

    Returns
    -------
    savepath : str
        path of the written file
    """
    savepath = os.path.join(folder, f'{filename}.csv')
    save_csv(report_to_frame(report), savepath)
    return savepath
