import json
import os
import pytest
from SasakiLift.analyses.analysis_pipeline import catalog_listing
from SasakiLift.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from SasakiLift.geometry.potentials import catalog_names


def _write(folder, name, text):
    path = os.path.join(folder, name)
    with open(path, 'w', encoding='utf-8') as conf_file:
        conf_file.write(text)
    return path


@pytest.fixture
def small_conf(tmp_path):
    return _write(tmp_path, 'small.yml', 'samples:\n  count: 2\ngrid:\n  nx: 9\n  ny: 9\n')


def test_catalog_json(capsys):
    assert main(['catalog', '--json']) == EXIT_OK
    listing = json.loads(capsys.readouterr().out)
    names = [row['name'] for row in listing['catalog']]
    assert names == catalog_names()
    assert set(listing['catalog'][0]) == {'name', 'F', 'domain', 'lambda0', 'tag', 'description'}
    assert set(listing['templates']) == {'tubular', 'custom'}


def test_catalog_table(capsys):
    assert main(['catalog']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'fubini_study' in out and 'tubular template' in out


def test_check_fubini_study(tmp_path, capsys, small_conf):
    code = main(['check', '--config', small_conf, '--root', str(tmp_path), '--json'])
    result = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert result['passed']
    assert result['lambda0'] == pytest.approx(2.0)
    assert os.path.exists(os.path.join(tmp_path, 'results', 'settings.yml'))


def test_missing_config(tmp_path, capsys):
    code = main(['check', '--config', os.path.join(tmp_path, 'nope.yml'), '--root', str(tmp_path)])
    assert code == EXIT_CONFIG
    assert 'configuration error' in capsys.readouterr().err


@pytest.mark.parametrize('text', ['potential: [unclosed\n', 'lift:\n  bogus: 1\n', 'grid:\n  nx: 3\n',
                                  "potential:\n  kind: custom\n  expression: 'x +'\n"])
def test_bad_configs_exit_with_two(tmp_path, text):
    conf = _write(tmp_path, 'bad.yml', text)
    assert main(['lift', '--config', conf, '--root', str(tmp_path)]) == EXIT_CONFIG


def test_lift_is_deterministic(tmp_path, capsys, small_conf):
    outputs = []
    for folder in ('first', 'second'):
        assert main(['lift', '--config', small_conf, '--root', str(tmp_path), '--out', folder, '--json',
                     '--seed', '3']) == EXIT_OK
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    report = json.loads(outputs[0])
    assert report['solver']['mode'] == 'constant'
    assert report['verdict'] == 'ok'
    assert os.path.exists(os.path.join(tmp_path, 'first', 'q.csv'))


def test_lift_without_constant_solution_fails(tmp_path, capsys):
    conf = _write(tmp_path, 'harmonic.yml', 'potential:\n  kind: harmonic\nlift:\n  lambda: 1.0\n  mode: constant\n'
                                            'samples:\n  count: 2\n')
    assert main(['lift', '--config', conf, '--root', str(tmp_path)]) == EXIT_FAIL
    assert 'no constant solution' in capsys.readouterr().err


def test_verify_fubini_study_is_einstein(tmp_path, capsys, small_conf):
    code = main(['verify', '--config', small_conf, '--root', str(tmp_path), '--json'])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert report['verdict'] == 'einstein'
    assert report['reflection']['passed']
    assert report['reflection']['mirrored_verdict'] == 'einstein'
    assert 'source_inconsistency' not in report
    assert os.path.exists(os.path.join(tmp_path, 'results', 'report.json'))
    assert len(report['curvature']['samples']) == 2


def test_verify_harmonic_is_ricci_flat(tmp_path, capsys):
    conf = _write(tmp_path, 'harmonic.yml', 'potential:\n  kind: harmonic\nlift:\n  lambda: 0.0\n'
                                            'samples:\n  count: 2\n')
    code = main(['verify', '--config', conf, '--root', str(tmp_path), '--json'])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert report['verdict'] == 'einstein'
    assert report['solver']['mode'] == 'explicit_p'
    assert report['reflection']['phase_flipped_verdict'] == 'fail'


def test_verify_labels_the_frt_inconsistency(tmp_path, capsys):
    conf = _write(tmp_path, 'frt.yml', 'potential:\n  kind: frt\nlift:\n  lambda: 0.0\n  mode: explicit_p\n'
                                       'samples:\n  count: 2\n')
    code = main(['verify', '--config', conf, '--root', str(tmp_path), '--json'])
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert code == EXIT_FAIL
    assert report['verdict'] == 'fail'
    assert 'p = x' in report['source_inconsistency']
    assert 'not to a solver' in captured.err


def test_catalog_tags():
    frame = catalog_listing()
    listing = dict(zip(frame['name'], frame['tag']))
    assert listing == {'flat': 'heisenberg-flat', 'fubini_study': 'kahler-einstein-lift',
                       'poincare': 'kahler-einstein-lift', 'harmonic': 'ricci-flat-harmonic',
                       'tubular': 'quasi-einstein-tubular', 'frt': 'fefferman-robinson-trautman'}


def test_a_command_is_required():
    with pytest.raises(SystemExit):
        main([])
