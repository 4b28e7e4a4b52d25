"""Run manifests, CSV and JSON emission, and the mapping of library errors to exit codes"""
import csv
import functools
import json
import logging

import click
import numpy as np
from flask_restful import fields, marshal

from app import __version__, app
from app.common.errors import IBError
from app.common.probability import to_bits


class CommandError(click.ClickException):
    def __init__(self, message, exit_code=1):
        super().__init__(message)
        self.exit_code = exit_code


def translate_errors(command):
    """Turns library errors into a click exception carrying their exit code"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except IBError as err:
            raise CommandError("{}: {}".format(type(err).__name__, err), err.exit_code)
    return wrapper


def _set_verbose(ctx, param, value):
    if value:
        app.logger.setLevel(logging.DEBUG)
    return value


def output_options(command):
    """--out, --json, --bits and --verbose, shared by every command"""
    command = click.option('--verbose', is_flag=True, expose_value=False, callback=_set_verbose,
                           help='Log at DEBUG level')(command)
    command = click.option('--bits', is_flag=True, help='Report information in bits instead of nats')(command)
    command = click.option('--json', 'as_json', is_flag=True, help='Write JSON instead of CSV')(command)
    command = click.option('--out', default='-', type=click.Path(dir_okay=False, allow_dash=True),
                           help='Output file (default: standard output)')(command)
    return command


#######################
# Manifest
#######################

def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError("{!r} is not JSON serializable".format(value))


def run_manifest(command, problem, settings, out):
    return {'command': command, 'problem': problem.name, 'settings': settings,
            'version': __version__, 'out': out}


def manifest_json(manifest):
    return json.dumps(manifest, sort_keys=True, separators=(',', ':'), default=_plain)


#######################
# Columns
#######################

def info_columns(bits):
    unit = 'bits' if bits else 'nats'
    return ['i_x_' + unit, 'i_y_' + unit]


def info_cells(info, bits):
    if bits:
        return [to_bits(info.i_x), to_bits(info.i_y)]
    return [info.i_x, info.i_y]


def root_columns(n_clusters, n_y):
    """Flattened root: decoders cluster by cluster, then the marginal"""
    names = ['decoder_{}_{}'.format(y, t) for t in range(n_clusters) for y in range(n_y)]
    return names + ['marginal_{}'.format(t) for t in range(n_clusters)]


def root_cells(root, n_clusters):
    """Root values padded with NaN up to n_clusters"""
    decoders = np.full((root.n_y, n_clusters), np.nan)
    marginal = np.full(n_clusters, np.nan)
    decoders[:, :root.n_clusters] = root.decoders
    marginal[:root.n_clusters] = root.marginal
    return list(decoders.T.ravel()) + list(marginal)


def _field(value):
    if isinstance(value, (bool, np.bool_)):
        return fields.Boolean()
    if isinstance(value, (int, np.integer)):
        return fields.Integer()
    if isinstance(value, (float, np.floating)):
        return fields.Float()
    return fields.String()


def _cell(value, float_format):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return float_format % value
    return str(value)


def write_table(kind, manifest, header, rows, out='-', as_json=False):
    """Writes rows (lists aligned with header) as versioned CSV or as a JSON document"""
    version = app.config['CSV_SCHEMA_VERSION']
    with click.open_file(out, 'w') as stream:
        if as_json:
            records = [dict(zip(header, row)) for row in rows]
            field_map = {name: _field(value) for name, value in zip(header, rows[0])} if rows else {}
            document = {'schema': '{}/{}'.format(kind, version), 'manifest': manifest, 'columns': header,
                        'rows': [dict(marshal(record, field_map)) for record in records]}
            stream.write(json.dumps(document, sort_keys=True, default=_plain) + '\n')
            return

        stream.write('# schema: {}/{}\n'.format(kind, version))
        stream.write('# manifest: {}\n'.format(manifest_json(manifest)))
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(header)
        float_format = app.config['CSV_FLOAT_FORMAT']
        for row in rows:
            writer.writerow([_cell(value, float_format) for value in row])
