from importlib import resources

import pytest

from lowparse.conllu import read_conllu


def toy(name, lang):
    return read_conllu(str(resources.files("lowparse.data").joinpath("toy", name)), lang)


@pytest.fixture(scope="session")
def toy_target():
    return toy("tgt_train.conllu", "tgt")


@pytest.fixture(scope="session")
def toy_dev():
    return toy("tgt_dev.conllu", "tgt")


@pytest.fixture(scope="session")
def toy_source():
    return toy("src_train.conllu", "src")


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
