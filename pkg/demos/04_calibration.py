"""
A calibration for the unit circle
=================================

omega = x0 dx1 - x1 dx0 has |omega(x)| = |x| and equals 1 on the unit
tangent of the unit circle. On the unit disc it certifies the circle (a
sampled certificate, not a proof). On a larger box the bound |omega| <= 1
breaks at the corners.
"""

from isoperi import PolynomialOneForm, Region, circle, exterior_derivative, sample_fourier, verify_certificate

omega = PolynomialOneForm.canonical_primitive(2, 0, 1, scale=1.0)
print("d omega:", exterior_derivative(omega).constant_form().coeffs)

for label, region in (("unit disc", Region.disc(1.0)), ("[-2, 2]^2", Region.box(2.0))):
    cert = verify_certificate(omega, region, circle(), curve_points=512)
    print(f"{label:10s} margin {cert.comass_margin: .4f}  defect {cert.tangency_defect:.1e}  valid={cert.valid}")

# On the polygon the edge midpoints sit inside the circle, so the tangency
# check picks up the chord error 1 - cos(pi / N).
for N in (64, 256, 1024):
    cert = verify_certificate(omega, Region.disc(1.0), sample_fourier(circle(), N))
    print(f"polygon N = {N:5d}: tangency defect {cert.tangency_defect:.2e}")
