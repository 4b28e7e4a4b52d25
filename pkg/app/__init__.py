# Python v3.9+

from flask import Flask

__version__ = '1.0.0'

app = Flask(__name__)
app.config.from_object('config')
app.config.from_envvar('IBRT_SETTINGS', silent=True)
app.logger.setLevel(app.config['LOG_LEVEL'])

# import commands (each module registers itself on app.cli)
from app.resources import solve, track, curve, diagnostics, order_study
