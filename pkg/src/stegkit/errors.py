class FormatError(ValueError):
    """Malformed or truncated file content (PGM, PMAP/CMAP, bit files)."""


class InfeasibleError(ValueError):
    """Requested payload cannot be embedded (entropy bound or blocked trellis)."""
