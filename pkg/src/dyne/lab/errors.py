"""Exceptions raised by the dyne.lab package"""


class DyneError(Exception):
    '''Base class of every error raised by dyne.lab'''


class DomainError(DyneError, ValueError):
    '''An argument lies outside the domain of an operation'''


class AmbiguousEstimate(DyneError):
    '''The estimator phasor is too small to carry a phase

    Raised for single-quadrature degenerate records (Mark II) or an all-zero
    accumulator (Mark I, I/Q).
    '''

    def __init__(self, message, magnitude=0.0):
        super().__init__(message)
        self.magnitude = magnitude


class DegenerateMean(DyneError):
    '''The resultant length of a phase sample is too small for a mean'''

    def __init__(self, message, resultant_length=0.0):
        super().__init__(message)
        self.resultant_length = resultant_length


class ConfigError(DyneError, ValueError):
    '''Configuration could not be parsed or validated

    ``key`` holds the dotted path of the offending key when one is known.
    '''

    def __init__(self, message, key=None):
        if key:
            message = "{k}: {m}".format(k=key, m=message)
        super().__init__(message)
        self.key = key
