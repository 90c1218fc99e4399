"""Tasks for use with Invoke."""
from invoke import task


def run_cmd(context, exec_cmd):
    """Wrapper to run the invoke task commands.

    Args:
        context (invoke.task): Invoke task object.
        exec_cmd (str): Command to run.

    Returns:
        result (obj): Contains Invoke result from running task.
    """
    print(f"LOCAL - Running command {exec_cmd}")
    return context.run(exec_cmd, pty=True)


@task(help={"slow": "Also run the statistical checks marked slow"})
def pytest(context, slow=False):
    """This will run pytest.

    Args:
        context (obj): Used to run specific commands
        slow (bool): Include tests marked slow
    """
    exec_cmd = "pytest" if slow else 'pytest -m "not slow"'
    run_cmd(context, exec_cmd)


@task
def black(context):
    """This will run black to check that Python files adherence to black standards.

    Args:
        context (obj): Used to run specific commands
    """
    run_cmd(context, "black --check --diff .")


@task
def flake8(context):
    """This will run flake8.

    Args:
        context (obj): Used to run specific commands
    """
    run_cmd(context, "flake8 mcd_density tests tasks.py")


@task
def pylint(context):
    """This will run pylint on the package and the tests.

    Args:
        context (obj): Used to run specific commands
    """
    run_cmd(context, "pylint mcd_density tests tasks.py")


@task
def pydocstyle(context):
    """This will run pydocstyle to validate docstring formatting.

    Args:
        context (obj): Used to run specific commands
    """
    run_cmd(context, "pydocstyle mcd_density")


@task
def bandit(context):
    """This will run bandit to validate basic static code security analysis.

    Args:
        context (obj): Used to run specific commands
    """
    run_cmd(context, "bandit --recursive mcd_density")


@task
def tests(context):
    """This will run all linters and the fast tests.

    Args:
        context (obj): Used to run specific commands
    """
    black(context)
    flake8(context)
    pylint(context)
    pydocstyle(context)
    bandit(context)
    pytest(context)
    print("All tests have passed!")


@task
def smoke(context, out="smoke.md"):
    """Run a short density benchmark and write a markdown table.

    Args:
        context (obj): Used to run specific commands
        out (str): Output file
    """
    run_cmd(
        context,
        f"MCD_N_TEST=10 MCD_DENSITY__REPETITIONS=1 mcd-density bench-density --grid-points 200 --format markdown --out {out}",
    )
