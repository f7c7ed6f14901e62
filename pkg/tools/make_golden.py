"""Write tests/data/g_reference.csv: the kick profile at 200 points of [0, 1].

Evaluated with mpmath at 50 digits from the closed form, independently of the
package's own kernel code, for params L1=L2=0.1, s1=s2=s3=50, b=0.
"""
import pathlib

import mpmath as mp

mp.mp.dps = 50
L1, L2, S1, S2, S3, B = (mp.mpf(v) for v in ("0.1", "0.1", "50", "50", "50", "0"))


def g(x):
    x = abs(x)
    return (mp.mpf(1) / 2 * (mp.tanh(S1 * (x - L1)) + mp.tanh(S1 * (x + L1)))
            - mp.tanh(S2 * (x - (mp.mpf(1) / 2 + B)))
            - mp.mpf(1) / 2 * (mp.tanh(S3 * (x - (1 - L2))) - mp.tanh(S3 * (x - (1 + L2)))))


out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "g_reference.csv"
lines = ["u,g"]
for k in range(200):
    u = mp.mpf(k) / 199
    lines.append(f"{repr(float(u))},{mp.nstr(g(u), 20)}")
out.write_text("\n".join(lines) + "\n")
print("wrote", out)
