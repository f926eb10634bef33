from gym import error


class Error(error.Error):
    pass


# geo_core

class DuplicateCoordinates(Error):
    def __init__(self, i, j):
        super().__init__('sites {} and {} share identical coordinates (zero distance)'.format(i, j))
        self.i = i
        self.j = j


class MissingSales(Error):
    def __init__(self, j):
        super().__init__('site {} has no base-product sales'.format(j))
        self.j = j


class EmptyNetwork(Error):
    pass


# spatial_stats

class ConstantVector(Error):
    pass


class EmptyWeights(Error):
    pass


# demand_models

class MissingField(Error):
    def __init__(self, site, field):
        super().__init__('site {} is missing required field `{}`'.format(site, field))
        self.site = site
        self.field = field


class SingularDesign(Error):
    pass


class NonConvergence(Error):
    def __init__(self, max_iter, model=None):
        super().__init__('SVR solver did not converge within {} pair updates'.format(max_iter))
        self.max_iter = max_iter
        self.model = model


class FeatureDimensionMismatch(Error):
    def __init__(self, expected, found):
        super().__init__('expected {} features, found {}'.format(expected, found))
        self.expected = expected
        self.found = found


class ModelMismatch(Error):
    pass


# model_select

class ZeroActual(Error):
    def __init__(self, index):
        super().__init__('actual value at index {} is zero; MAPE is undefined'.format(index))
        self.index = index


class ExtensionCapReached(Error):
    def __init__(self, axes, result=None):
        super().__init__('grid extension cap reached on axis {}'.format(', '.join(axes)))
        self.axes = tuple(axes)
        self.result = result


class FoldFailure(Error):
    def __init__(self, repeat, fold, cause):
        super().__init__('repeat {} fold {} failed: {}'.format(repeat, fold, cause))
        self.repeat = repeat
        self.fold = fold
        self.cause = cause


# optimize

class SpatialModelNotLinearizable(Error):
    pass


class NotAffineInFeatures(Error):
    pass


class TimeLimit(Error):
    """The exact search ran out of its time or node budget; `incumbent` is the best solution found."""

    def __init__(self, incumbent, reason='time limit'):
        super().__init__('{} reached; best incumbent objective {}'.format(reason, incumbent.objective_value))
        self.incumbent = incumbent
        self.reason = reason


# experiment

class NoActiveSites(Error):
    pass


class DegenerateBaseline(Error):
    def __init__(self, s, draw, k):
        super().__init__('baseline adds nothing over z0 (s={}, draw={}, K={})'.format(s, draw, k))
        self.s = s
        self.draw = draw
        self.k = k


# cli_io

class SiteDataError(Error):
    """Site file validation failure; `issues` holds (line, field, reason) triples."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = ['line {}: {}: {}'.format(line, field, reason) for line, field, reason in self.issues]
        super().__init__('invalid site data:\n  ' + '\n  '.join(lines))


class SchemaError(SiteDataError):
    pass


class DuplicateId(SiteDataError):
    pass


class OutOfRangeCoordinate(SiteDataError):
    pass


class ConfigError(Error):
    pass


class PipelineError(Error):
    def __init__(self, stage, cause):
        super().__init__('stage `{}` failed: {}'.format(stage, cause))
        self.stage = stage
        self.cause = cause
