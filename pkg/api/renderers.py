from csv import DictReader
from io import StringIO
import json
import math

import numpy as np
from django.conf import settings

from rest_framework.exceptions import ParseError
from rest_framework.parsers import BaseParser
from rest_framework.renderers import BaseRenderer


class JSONReportRenderer(BaseRenderer):
    """
    Render report data as JSON with every float written to
    MINIMAX_JSON_DIGITS significant digits, so binary64 values round-trip.
    """

    media_type = 'application/json'
    format = 'json'
    charset = 'utf-8'
    indent = 2

    def render(self, data, accepted_media_type=None, renderer_context=None):
        output = StringIO()
        self._write(output, data, 0)
        output.write('\n')
        return output.getvalue()

    def format_float(self, value):
        if not math.isfinite(value):
            raise ValueError('cannot render non-finite number %r' % value)
        text = '%.*g' % (settings.MINIMAX_JSON_DIGITS, value)
        if '.' not in text and 'e' not in text:
            text += '.0'
        return text

    def _write(self, output, value, depth):
        pad = ' ' * (self.indent * (depth + 1))
        end = ' ' * (self.indent * depth)
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, dict):
            if not value:
                output.write('{}')
                return
            output.write('{\n')
            for i, (key, item) in enumerate(value.items()):
                output.write('%s%s: ' % (pad, json.dumps(str(key))))
                self._write(output, item, depth + 1)
                output.write(',\n' if i + 1 < len(value) else '\n')
            output.write(end + '}')
        elif isinstance(value, (list, tuple)):
            if not value:
                output.write('[]')
            elif all(isinstance(item, (int, float, np.number)) and not isinstance(item, bool)
                     for item in value):
                # vectors stay on one line
                output.write('[%s]' % ', '.join(self._scalar(item) for item in value))
            else:
                output.write('[\n')
                for i, item in enumerate(value):
                    output.write(pad)
                    self._write(output, item, depth + 1)
                    output.write(',\n' if i + 1 < len(value) else '\n')
                output.write(end + ']')
        else:
            output.write(self._scalar(value))

    def _scalar(self, value):
        if value is None or isinstance(value, (bool, np.bool_)):
            return json.dumps(None if value is None else bool(value))
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return self.format_float(float(value))
        return json.dumps(str(value))


class ScenarioCSVParser(BaseParser):
    """
    Parse a scenario file: a header row, then one row per atom with a
    `label`, an optional `weight` and one column per position.
    """

    media_type = 'text/csv'

    def parse(self, stream, media_type=None, parser_context=None):
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode(self.charset())
        reader = DictReader(StringIO(text))
        if not reader.fieldnames or 'label' not in reader.fieldnames:
            raise ParseError('scenario file needs a header with a "label" column')
        rows = []
        for line, row in enumerate(reader, start=2):
            if None in row or any(value is None for value in row.values()):
                raise ParseError('line %d: wrong number of columns' % line)
            parsed = {'label': row['label'].strip()}
            for key, value in row.items():
                if key == 'label':
                    continue
                try:
                    parsed[key.strip()] = float(value)
                except ValueError:
                    raise ParseError('line %d: %r is not a number' % (line, value))
            rows.append(parsed)
        if not rows:
            raise ParseError('scenario file has no rows')
        return rows

    def charset(self):
        return 'utf-8'
