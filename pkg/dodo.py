import os

DOIT_CONFIG = {
    'default_tasks': ['flake8', 'test'],
    'reporter': 'executed-only',
}


def task_flake8():
    """flake8 - static check for python files"""
    for folder in ('attnfuse', 'tests'):
        yield {
            'name': os.path.join(os.getcwd(), folder),
            'actions': ['flake8 {0}/'.format(folder)],
        }


def task_pydocstyle():
    """pydocstyle -- static check for docstring style"""
    yield {
        'name': os.path.join(os.getcwd(), 'attnfuse'),
        'actions': ["pydocstyle --count --match-dir='(?!^\\.).*' attnfuse/"],
    }


def task_test():
    """run unit-tests using py.test, skipping the slow statistical checks"""
    return {
        'actions': ['py.test -m "not slow" tests/'],
    }


def task_test_slow():
    """run only the slow statistical checks"""
    return {
        'actions': ['py.test -m slow tests/'],
        'verbosity': 2,
    }


def task_coverage():
    """run unit-tests using py.test, with coverage reporting"""
    return {
        'actions': ['py.test --cov attnfuse --cov-report term-missing tests/'],
        'verbosity': 2,
    }

