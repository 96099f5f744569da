import functools
import os
from typing import List, Optional

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from src import app_workflow
from src.errors import MsmTreeError
from src.harness.model_store import load_trained
from src.modals.app_data import DEFAULT_GRID, DEFAULT_REPEATS, ExperimentConfig, Method, load_settings
from src.modals.split_data import SplitOptions
from src.modals.svm_data import KernelKind
from src.modals.tree_data import ClassTree
from src.tree.class_tree import show_tree
from src.utils.commons import fetch_dataset
from src.utils.logger import get_module_logger

logger = get_module_logger(__name__)

load_dotenv()

METHOD_CHOICES = [method.value for method in Method]
KERNEL_CHOICES = [kind.value for kind in KernelKind]


def parse_list(value: Optional[str], cast=float) -> Optional[List]:
    if value is None or value.strip() == '':
        return None
    try:
        return [cast(item) for item in value.split(',') if item.strip()]
    except ValueError as error:
        raise click.BadParameter(f"expected a comma separated list: {error}") from error


def parse_methods(value: str) -> List[Method]:
    try:
        return [Method(name.strip()) for name in parse_list(value, str) or []]
    except ValueError as error:
        raise click.BadParameter(str(error), param_hint="'--methods'") from error


def experiment_options(func):
    '''Flags shared by every verb that trains.'''
    options = [
        click.option('--train', 'train_path', type=click.Path(exists=True, dir_okay=False),
                     help='Training data in LIBSVM format.'),
        click.option('--test', 'test_path', type=click.Path(exists=True, dir_okay=False),
                     help='Test data in LIBSVM format.'),
        click.option('--train-fraction', type=float, help='Split --train when no --test is given.'),
        click.option('--method', type=click.Choice(METHOD_CHOICES), default=Method.msm.value, show_default=True),
        click.option('--kernel', type=click.Choice(KERNEL_CHOICES), default=KernelKind.gaussian.value,
                     show_default=True),
        click.option('--eta', type=float, help='Fixed Gaussian width; tuned when omitted.'),
        click.option('--C', 'C', type=float, help='Fixed regularization; tuned when omitted.'),
        click.option('--grid', help='Comma separated values tried for both C and eta.'),
        click.option('--folds', type=int, default=5, show_default=True),
        click.option('--seed', type=int, default=0, show_default=True),
        click.option('--beta', type=float, help='Class balance bound of the split search.'),
        click.option('--trace', is_flag=True, help='Write split iterations to trace.log.'),
        click.option('--out', 'out_dir', default='out', show_default=True, type=click.Path(file_okay=False)),
        click.option('--no-scale', is_flag=True, help='Keep features unscaled.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_config(train_path, test_path, train_fraction, method, kernel, eta, C, grid,
                 folds, seed, beta, trace, out_dir, no_scale) -> ExperimentConfig:
    if train_path is None:
        raise click.UsageError("missing option '--train'")
    values = parse_list(grid) or list(DEFAULT_GRID)
    try:
        return ExperimentConfig(
            train_path=train_path,
            test_path=test_path,
            train_fraction=train_fraction,
            method=Method(method),
            kernel=KernelKind(kernel),
            C_grid=values,
            eta_grid=values,
            C=C,
            eta=eta,
            folds=folds,
            seed=seed,
            split=SplitOptions(beta=beta, seed=seed),
            scale=not no_scale,
            trace=trace,
            out_dir=out_dir
        )
    except ValidationError as error:
        raise click.UsageError(str(error)) from error


def handle_errors(func):
    '''Turn library errors into a message and a nonzero exit code.'''
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except MsmTreeError as error:
            logger.error("%s", error)
            raise click.ClickException(str(error)) from error
    return wrapper


@click.group()
def cli():
    """Class-structure trees by maximum separating margin."""


@cli.command()
@experiment_options
@handle_errors
def train(**kwargs):
    """Tune and train on --train, save model.json (and tree.json) under --out."""
    cfg = build_config(**kwargs)
    trained = app_workflow.train_model(cfg)
    click.echo(f"trained {trained.method.value} (C={trained.C:g}, eta={trained.kernel.eta:g}) -> {cfg.out_dir}")


@cli.command()
@click.option('--model', 'model_dir', required=True, type=click.Path(exists=True, file_okay=False))
@click.option('--data', 'data_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--out', 'out_path', default=None, type=click.Path(dir_okay=False),
              help='CSV of predicted labels; printed when omitted.')
@handle_errors
def predict(model_dir, data_path, out_path):
    """Predict labels of --data with a saved model."""
    frame = app_workflow.predict_file(model_dir, data_path, out_path)
    if out_path is None:
        for label in frame['label']:
            click.echo(f"{label:g}")


@cli.command()
@experiment_options
@click.option('--model', 'model_dir', type=click.Path(exists=True, file_okay=False),
              help='Score a saved model on --test instead of training.')
@handle_errors
def evaluate(model_dir, **kwargs):
    """Run the full experiment and write report.json and confusion.csv under --out."""
    if model_dir is not None:
        if kwargs['test_path'] is None:
            raise click.UsageError("--model needs --test")
        report = app_workflow.evaluate_saved(model_dir, kwargs['test_path'], kwargs['out_dir'])
    else:
        report = app_workflow.run_experiment(build_config(**kwargs))
    click.echo(
        f"{report.method}: mean per-class accuracy {report.mean_per_class_accuracy:.4f}, "
        f"evaluations per instance {report.evals_mean:.2f} (max {report.evals_max})"
    )


@cli.command()
@experiment_options
@click.option('--methods', default='msm,random-tree,1vs1,1vsr', show_default=True)
@click.option('--repeats', type=int, default=DEFAULT_REPEATS, show_default=True)
@handle_errors
def compare(methods, repeats, **kwargs):
    """Mean and deviation of accuracy per method over seeded splits."""
    cfg = build_config(**kwargs)
    chosen = parse_methods(methods)
    table = app_workflow.compare(cfg, chosen, repeats)
    click.echo(table.to_string(index=False))


@cli.command('cost-curve')
@experiment_options
@click.option('--methods', default='msm,1vs1,1vsr', show_default=True)
@click.option('--classes', 'class_counts', required=True, help='Comma separated class counts.')
@handle_errors
def cost_curve(methods, class_counts, **kwargs):
    """Classifier evaluations per instance as the number of classes grows."""
    cfg = build_config(**kwargs)
    chosen = parse_methods(methods)
    table = app_workflow.cost_curve(cfg, chosen, parse_list(class_counts, int))
    click.echo(table.to_string(index=False))


@cli.command('split-trace')
@experiment_options
@click.option('--classes', help='Comma separated internal classes to split; all when omitted.')
@handle_errors
def split_trace(classes, **kwargs):
    """Trace one cutting-plane split of the root (or of --classes)."""
    cfg = build_config(**kwargs)
    for line in app_workflow.trace_root_split(cfg, parse_list(classes, int)):
        click.echo(line)


@cli.command()
@click.option('--url', required=True)
@click.option('--sha256', default=None, help='Expected hex digest of the file.')
@click.option('--out', 'target_dir', default=None, type=click.Path(file_okay=False),
              help='Target directory; MSMTREE_DATA_DIR when omitted.')
@handle_errors
def fetch(url, sha256, target_dir):
    """Download a dataset file, optionally checking its digest."""
    target_dir = target_dir or load_settings().data_dir
    click.echo(fetch_dataset(url, sha256, target_dir))


@cli.group()
def tree():
    """Inspect saved class trees."""


@tree.command('show')
@click.option('--model', 'model_dir', required=True, type=click.Path(exists=True, file_okay=False))
@click.option('--internal', is_flag=True, help='Print internal class numbers instead of original labels.')
@handle_errors
def tree_show(model_dir, internal):
    """Print the nested class grouping of a saved tree."""
    trained = load_trained(model_dir)
    if not isinstance(trained.model, ClassTree):
        raise click.ClickException(f"'{os.path.join(model_dir, 'model.json')}' holds a {trained.method.value} model, not a tree")
    click.echo(show_tree(trained.model, None if internal else trained.label_map))
