"""
sasaki_lift_main.py
====================================
The core module of the project.
Starts the analysis pipeline: check, lift and verify for one configuration.
"""
import logging
from SasakiLift.input_output.input_utils import read_run_config
from SasakiLift.analyses.analysis_pipeline import initialize_analysis, run_check, run_verify

'''
Example usage of the analysis pipeline.
To lift another potential, point CONF at another file in confs/ or write your own (see `sasaki-lift catalog`).
The report (report.json), the residual table and the solved q are written to <root_folder>/<output.directory>.
'''

logging.basicConfig(level=logging.INFO, format='%(asctime)s %(name)s %(levelname)s: %(message)s')

CONF = 'confs/fubini_study.yml'
settings = read_run_config(CONF)
root_folder = '.'

folders, potential = initialize_analysis(settings, root_folder)

check = run_check(settings, potential)
if check['passed']:
    report = run_verify(settings, folders, potential)
    print(f'{potential.name}: verdict {report["verdict"]}')
else:
    print(f'{potential.name}: the CR structure checks failed, see the log')
