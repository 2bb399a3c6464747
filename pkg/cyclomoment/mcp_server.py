"""
MCP Server for the cyclomoment experiments

Exposes the moment, lattice and short-generator experiments as MCP tools via STDIO
transport for local agent integration. Every tool returns report rows as JSON lines,
the same text the command line prints.
"""

from typing import List, Optional

from dotenv import load_dotenv
from mcp.server.fastmcp import FastMCP
from mcp.server.fastmcp.utilities.logging import configure_logging, get_logger

from cyclomoment import experiments
from cyclomoment.config import default_log_level
from cyclomoment.numtheory.characters import Parity
from cyclomoment.reports import render

logger = get_logger(__name__)

# Initialize FastMCP server
mcp = FastMCP("cyclomoment")


@mcp.tool()
async def moments_tool(moduli: List[int], parity: str = "even", weighted: bool = False) -> str:
    """
    Compute the negative square moment of L(1, chi) over the characters of each modulus.

    The unweighted moment sums 1/|L(1, chi)|^2 over non-principal characters of the
    requested parity. The weighted moment divides each term by the conductor of chi and
    needs a prime-power modulus.

    Args:
        moduli: Moduli q >= 3, e.g. [101, 103]
        parity: 'even' or 'odd', defaults to 'even'
        weighted: Weight each character by 1/conductor, defaults to False

    Returns:
        One JSON line per modulus with the sum, main term, relative deviation and error bound, or error message
    """
    try:
        return render(experiments.moments_rows(moduli, Parity(parity.lower()), weighted))
    except ValueError as e:
        return f"Error: {str(e)}"
    except Exception as e:
        logger.exception("Unexpected failure in MCP tool")
        return f"Error: {type(e).__name__}: {str(e)}"


@mcp.tool()
async def weighted_sum_tool(q: int, l: int = 1, X: float = 1e4) -> str:
    """
    Evaluate the exponentially weighted Moebius double sum over pairs m = +-n (mod l), both coprime to q.

    Args:
        q: Modulus whose prime factors are excluded from m and n
        l: Congruence modulus, defaults to 1
        X: Scale of the weight exp(-mn/X), defaults to 1e4

    Returns:
        JSON line with the diagonal and off-diagonal parts, main term and envelope, or error message
    """
    try:
        return render([experiments.weighted_sum_row(q, l, X)])
    except ValueError as e:
        return f"Error: {str(e)}"
    except Exception as e:
        logger.exception("Unexpected failure in MCP tool")
        return f"Error: {type(e).__name__}: {str(e)}"


@mcp.tool()
async def dual_norms_tool(moduli: List[int], C: float = 1.0, delta: float = 0.0, skip_algebra: bool = False) -> str:
    """
    Compare the dual basis norm of the log-cyclotomic-unit lattice computed two ways.

    The linear-algebra route inverts the Gram matrix; the character route uses the
    weighted negative moment. Rows also carry the asymptotic norm and the decoding
    radii derived from each estimate.

    Args:
        moduli: Prime-power moduli q >= 5, e.g. [101, 125]
        C: Constant of the generic upper bound, defaults to 1.0
        delta: Slack on the asymptotic decoding radius, defaults to 0.0
        skip_algebra: Skip the linear-algebra route (large q), defaults to False

    Returns:
        One JSON line per modulus, or error message
    """
    try:
        return render(experiments.dual_norm_rows(moduli, C, delta, skip_algebra))
    except ValueError as e:
        return f"Error: {str(e)}"
    except Exception as e:
        logger.exception("Unexpected failure in MCP tool")
        return f"Error: {type(e).__name__}: {str(e)}"


@mcp.tool()
async def sgp_tool(q: int, trials: int = 1000, seed: int = 0, r: float = 1.0, E: int = 10) -> str:
    """
    Run the short generator recovery experiment with Babai round-off decoding.

    Each trial hides a random short generator behind a random unit and checks whether
    round-off on the dual basis recovers it. Trials are reproducible from (seed, trial index).

    Args:
        q: Prime-power modulus q >= 5
        trials: Number of Monte-Carlo trials, defaults to 1000
        seed: Master seed in [0, 2^64), defaults to 0
        r: Standard deviation of the Gaussian coordinates, defaults to 1.0
        E: Unit exponents are drawn from [-E, E], defaults to 10

    Returns:
        JSON line with the empirical success rate next to the proven lower bound, or error message
    """
    try:
        return render([experiments.sgp_experiment(q, trials, seed, r, E)])
    except ValueError as e:
        return f"Error: {str(e)}"
    except Exception as e:
        logger.exception("Unexpected failure in MCP tool")
        return f"Error: {type(e).__name__}: {str(e)}"


@mcp.tool()
async def orthogonality_tool(q: int, weighted: Optional[int] = None) -> str:
    """
    Check the orthogonality identity for sums over characters of fixed parity against its divisor-sum form.

    Args:
        q: Modulus q >= 3
        weighted: 1 for the 1/conductor weighted identity, 0 for the plain one, omit for both

    Returns:
        One JSON line per (weighted, parity) pair with the worst absolute difference, or error message
    """
    try:
        return render(experiments.orthogonality_rows(q, weighted))
    except ValueError as e:
        return f"Error: {str(e)}"
    except Exception as e:
        logger.exception("Unexpected failure in MCP tool")
        return f"Error: {type(e).__name__}: {str(e)}"


if __name__ == "__main__":
    load_dotenv()
    configure_logging(default_log_level())
    # Run server with STDIO transport
    mcp.run(transport="stdio")
