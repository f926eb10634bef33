import logging

import numpy as np
import pandas as pd

from ..error import DuplicateId, OutOfRangeCoordinate, SchemaError
from ..geo_core import Network, Site

logger = logging.getLogger(__name__)


def load_sites(path, distance_metric='haversine'):
    """
    Reads and validates a site CSV into a Network.

    Every row-level problem is collected as (line, field, reason), with the header on line 1, and reported in one
    error: DuplicateId when all problems are repeated ids, OutOfRangeCoordinate when all are coordinates outside
    their range, SchemaError otherwise.
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [column.strip().lower() for column in frame.columns]
    missing = [column for column in SITE_COLUMNS if column not in frame.columns]
    if missing:
        raise SchemaError([(1, column, 'missing column') for column in missing])

    issues, sites, seen = [], [], {}
    for k, row in enumerate(frame[list(SITE_COLUMNS)].itertuples(index=False)):
        line = k + 2
        row = row._asdict()
        site_id = row['id'].strip()
        row_issues = []
        if not site_id:
            row_issues.append((line, 'id', 'empty id', 'schema'))
        elif site_id in seen:
            row_issues.append((line, 'id', 'duplicate id {!r}, first on line {}'.format(site_id, seen[site_id]),
                               'duplicate'))
        else:
            seen[site_id] = line

        status = row['status'].strip().lower()
        if status not in STATUS_ALIASES:
            row_issues.append((line, 'status', 'should be active or candidate, found {!r}'.format(row['status']),
                               'schema'))

        values = {}
        for field in NUMERIC_COLUMNS:
            text = row[field].strip()
            if not text:
                values[field] = None
                continue
            try:
                values[field] = float(text)
            except ValueError:
                row_issues.append((line, field, 'not a number: {!r}'.format(text), 'schema'))
                continue
            if not np.isfinite(values[field]):
                row_issues.append((line, field, 'not finite', 'schema'))
            elif field in COORDINATE_RANGES:
                low, high = COORDINATE_RANGES[field]
                if not low <= values[field] <= high:
                    row_issues.append((line, field, 'outside [{}, {}]'.format(low, high), 'range'))
            elif values[field] < 0:
                row_issues.append((line, field, 'negative', 'schema'))

        for field in ('lat', 'lon'):
            if field in values and values[field] is None:
                row_issues.append((line, field, 'required', 'schema'))
        if STATUS_ALIASES.get(status) == 'active':
            for field in ('base_sales', 'addon_sales'):
                if values.get(field) is None and not any(issue[1] == field for issue in row_issues):
                    row_issues.append((line, field, 'required for active sites', 'schema'))
        elif STATUS_ALIASES.get(status) == 'candidate' and values.get('addon_sales') is not None:
            row_issues.append((line, 'addon_sales', 'candidate sites cannot carry add-on sales', 'schema'))

        issues.extend(row_issues)
        if not row_issues:
            sites.append(Site(id=site_id, status=STATUS_ALIASES[status], **values))

    if issues:
        kinds = {kind for _, _, _, kind in issues}
        error = ERROR_OF_KIND[kinds.pop()] if len(kinds) == 1 else SchemaError
        raise error([issue[:3] for issue in issues])

    if len(sites) < 2:
        raise SchemaError([(1, 'id', 'a network needs at least two sites, found {}'.format(len(sites)))])
    network = Network(sites, distance_metric=distance_metric)
    logger.info('Loaded %s from %s', network, path)
    return network


def write_sites(network, path):
    """Canonical site CSV: schema column order, lower-case status, empty cells for absent values."""
    rows = []
    for site in network.sites:
        rows.append({column: getattr(site, column) for column in SITE_COLUMNS})
    frame = pd.DataFrame(rows, columns=list(SITE_COLUMNS))
    frame.to_csv(path, index=False)
    logger.info('Wrote %d sites to %s', len(frame), path)


SITE_COLUMNS = ('id', 'lat', 'lon', 'status', 'base_sales', 'addon_sales', 'income', 'population')
NUMERIC_COLUMNS = ('lat', 'lon', 'base_sales', 'addon_sales', 'income', 'population')

COORDINATE_RANGES = {
    'lat': (-90.0, 90.0),
    'lon': (-180.0, 180.0),
}

STATUS_ALIASES = {
    'active': 'active',
    'candidate': 'candidate',
}

ERROR_OF_KIND = {
    'schema': SchemaError,
    'duplicate': DuplicateId,
    'range': OutOfRangeCoordinate,
}
