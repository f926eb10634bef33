import logging

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from ..envs.utils.draw import scale_radii
from ..error import EmptyNetwork

logger = logging.getLogger(__name__)


def format_table(frame, index=True):
    """Aligned-text rendering of a report table."""
    return frame.to_string(index=index, float_format=lambda value: '{:.6g}'.format(value))


def emit_table(frame, path=None, fmt='csv', index=True):
    """Writes `frame` to `path`, or returns its text when no path is given."""
    assert fmt in TABLE_FORMATS, 'format should be one of {}, found {}'.format(TABLE_FORMATS, fmt)
    text = frame.to_csv(index=index) if fmt == 'csv' else format_table(frame, index=index) + '\n'
    if path is None:
        return text
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info('Wrote %s', path)
    return text


def emit_map_svg(network, solution, path, title=None):
    """
    Static SVG map: active sites as uniform squares, candidates as circles whose radius grows linearly with base
    sales (floor radius when missing), chosen candidates filled and the rest outlined. Longitude and latitude are
    plotted equirectangularly around the region's mean latitude.
    `solution` may also be a plain collection of chosen network positions.
    """
    if network is None or len(network) == 0:
        raise EmptyNetwork('cannot draw a map of an empty network')
    chosen = set() if solution is None else set(getattr(solution, 'chosen', solution))
    candidates = list(network.candidates)
    assert chosen <= set(candidates), 'chosen sites should be candidates of the network'

    coords = network.coordinates
    radii = scale_radii(network.base_sales[candidates], MIN_RADIUS, MAX_RADIUS) if candidates else np.zeros(0)
    picked = np.array([site in chosen for site in candidates], dtype=bool)

    fig = Figure(figsize=(8, 8))
    ax = fig.add_subplot(1, 1, 1)
    active = list(network.active)
    if active:
        ax.scatter(coords[active, 1], coords[active, 0], marker='s', s=SQUARE_SIZE, c=ACTIVE_COLOR,
                   edgecolors='black', linewidths=0.5, label='current sites', zorder=3).set_gid('active-sites')
    if candidates:
        idle = ~picked
        if idle.any():
            ax.scatter(coords[candidates, 1][idle], coords[candidates, 0][idle], s=np.pi * radii[idle] ** 2,
                       facecolors='none', edgecolors=CANDIDATE_COLOR, linewidths=1.0, label='candidate sites',
                       zorder=2).set_gid('candidates')
        if picked.any():
            ax.scatter(coords[candidates, 1][picked], coords[candidates, 0][picked], s=np.pi * radii[picked] ** 2,
                       c=CHOSEN_COLOR, edgecolors=CANDIDATE_COLOR, linewidths=1.0, label='chosen sites',
                       zorder=2).set_gid('chosen-candidates')

    ax.set_aspect(1.0 / np.cos(np.radians(coords[:, 0].mean())))
    ax.set_xlabel('longitude')
    ax.set_ylabel('latitude')
    if title:
        ax.set_title(title)
    ax.legend(loc='upper right', fontsize='small')

    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    logger.info('Wrote map with %d chosen sites to %s', len(chosen), path)


TABLE_FORMATS = ('csv', 'text')

ACTIVE_COLOR = 'gold'
CANDIDATE_COLOR = 'steelblue'
CHOSEN_COLOR = 'steelblue'

SQUARE_SIZE = 40
MIN_RADIUS = 3.0
MAX_RADIUS = 10.0
SVG_HASH_SALT = 'expansion-gym'
