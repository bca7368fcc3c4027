"""qitbench: declare, check, and execute quotient inductive types.

The package is organized as a pipeline:

    schema       surface declarations, positivity checking, elaboration
    terms        signatures, free-monad terms, equations
    algebras     carriers, evaluation, satisfaction
    quotient     depth-bounded term universes and congruence quotients
    sizes        plump ordering on well-founded size trees
    diagrams     size-indexed diagrams and their colimits
    construction staged quotients, fixed points, and the colimit model
    cli          command line front end
"""

__version__ = "0.1.0"
