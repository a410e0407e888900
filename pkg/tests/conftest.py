import pytest

from codegaze import Snippet

GCD_SOURCE = """\
public class GcdCalc {
    // iterative greatest common divisor
    public static int gcd(int a, int b) {
        while (b != 0) {
            int t = b;
            b = a % b;
            a = t - b;
        }
        return a;
    }
}"""

SQRT_SOURCE = """\
public class NewtonSqrt {
    public static double sqrt(double x, double epsilon) {
        double approx = x / 2.0;
        while (Math.abs(x - approx) > epsilon) {
            approx = 0.5 * (approx + x / approx);
        }
        return x - approx;
    }
}"""


@pytest.fixture
def gcd_snippet() -> Snippet:
    return Snippet.from_source("gcd", GCD_SOURCE, 7, "greatest common divisor")


@pytest.fixture
def sqrt_snippet() -> Snippet:
    # buggy line: should return approx, not x - approx
    return Snippet.from_source("sqrt", SQRT_SOURCE, 7, "Newton square root")


@pytest.fixture
def flat_snippet() -> Snippet:
    # 12 tokens on one line: interior cursors get full 7-token windows
    return Snippet.from_source("flat", "a b c d e f g h i j k l", 1, "flat line")
