#!flask/bin/python
from flask.cli import FlaskGroup

from app import app

cli = FlaskGroup(create_app=lambda: app, help='Information Bottleneck root tracking')

if __name__ == '__main__':
    cli()
