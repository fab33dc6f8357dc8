# Enable abstraction; This is the root package.
from genie import abstract
abstract.declare_package(__name__)

# Canonical policy tokens, one subpackage each
TOKENS = ('adaptive', 'heterodyne', 'fixed')

# Other spellings accepted in configuration files
ALIASES = {
    'adaptive-dyne': 'adaptive',
    'adaptivedyne': 'adaptive',
    'het': 'heterodyne',
    'iq': 'heterodyne',
    'fixed-lo': 'fixed',
    'fixedlo': 'fixed',
    'homodyne': 'fixed',
}


def canonical_token(token):
    '''Return the canonical policy token for ``token`` or one of its aliases

    Raises
    ------

        LookupError: no policy was declared under that token
    '''
    name = str(token).lower()
    name = ALIASES.get(name, name)
    if name not in TOKENS:
        raise LookupError("Unknown policy '{t}', expected one of "
                          "{k}".format(t=token,
                                       k=', '.join(sorted(TOKENS + tuple(ALIASES)))))
    return name
