#pragma once

// 1-D multilayer slab mode solver.
//
// Waveguide cross-sections are reduced to layer stacks along one transverse
// axis. Guided modes are the roots of the transfer-matrix dispersion
// relation; roots are located by a dense scan over the transverse-wavenumber
// parameter followed by bisection. The solver works with the scalar slab
// field psi (E_y for TE, H_y for TM) and reports the E-dominant profile
// (psi for TE, psi/n^2 for TM, which carries the slot-enhancement
// discontinuity).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ringlink::modesolver {

enum class Polarization { TE, TM };

struct Layer {
    std::optional<double> thickness;  // meters; empty for the two outer layers
    double index = 1.0;
    double thermo_optic = 0.0;  // dn/dT, 1/degC
    bool is_analyte = false;
};

struct CrossSection {
    std::vector<Layer> layers;  // ordered bottom to top, outer layers semi-infinite
    Polarization polarization = Polarization::TE;
    double wavelength = 1.55e-6;  // meters

    void validate() const {
        if (layers.size() < 3)
            throw OutOfRange("cross-section needs at least 3 layers");
        if (wavelength <= 0.0)
            throw OutOfRange("wavelength must be positive");
        if (layers.front().thickness || layers.back().thickness)
            throw OutOfRange("outer layers must be semi-infinite (no thickness)");
        double n_outer = std::max(layers.front().index, layers.back().index);
        double n_max = 0.0;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const Layer& l = layers[i];
            if (l.index < 1.0)
                throw OutOfRange("refractive index below 1.0");
            if (i != 0 && i + 1 != layers.size()) {
                if (!l.thickness || *l.thickness <= 0.0)
                    throw OutOfRange("inner layer thickness must be positive");
            }
            n_max = std::max(n_max, l.index);
        }
        if (!(n_max > n_outer))
            throw NoGuidedMode("no layer index exceeds the outer claddings");
    }

    bool has_analyte() const {
        for (const Layer& l : layers)
            if (l.is_analyte) return true;
        return false;
    }

    // Copy with every analyte-flagged layer index shifted by dn.
    CrossSection shifted_analyte(double dn) const {
        CrossSection out = *this;
        for (Layer& l : out.layers)
            if (l.is_analyte) l.index += dn;
        return out;
    }

    // Copy with every layer index shifted by its thermo-optic response to dT.
    CrossSection shifted_temperature(double dT) const {
        CrossSection out = *this;
        for (Layer& l : out.layers) l.index += l.thermo_optic * dT;
        return out;
    }
};

struct FieldSample {
    double position = 0.0;   // meters, 0 at the bottom-most finite interface
    double amplitude = 0.0;  // unit-peak normalized
};

namespace detail {

// Per-layer piecewise solution of psi'' = -(n^2 - N^2) k0^2 psi, tracked in
// the dimensionless coordinate s = k0 (x - x_layer_start).
struct LayerField {
    double x0 = 0.0;       // layer start, meters (-inf for the bottom layer)
    double x1 = 0.0;       // layer end, meters (+inf for the top layer)
    double kappa = 0.0;    // |n^2 - N^2|^(1/2), dimensionless transverse wavenumber
    bool oscillatory = false;
    // psi(s) = a*cos(kappa s) + b*sin(kappa s)          (oscillatory)
    // psi(s) = a*cosh(kappa s) + b*sinh(kappa s)        (evanescent, inner)
    // psi(s) = a*exp(+kappa s)                          (bottom outer, s <= 0)
    // psi(s) = a*exp(-kappa s)                          (top outer, s >= 0)
    double a = 0.0, b = 0.0;
    double inv_n2 = 1.0;  // 1/n^2 of the layer, for the TM E-field weight
};

struct StackView {
    std::vector<double> n;       // layer indices
    std::vector<double> d;       // finite thicknesses (size layers-2), meters
    double k0 = 0.0;
    Polarization pol = Polarization::TE;

    double q(std::size_t i) const {
        return pol == Polarization::TM ? n[i] * n[i] : 1.0;
    }
};

inline StackView make_view(const CrossSection& cs) {
    StackView v;
    v.k0 = 2.0 * M_PI / cs.wavelength;
    v.pol = cs.polarization;
    for (const Layer& l : cs.layers) v.n.push_back(l.index);
    for (std::size_t i = 1; i + 1 < cs.layers.size(); ++i)
        v.d.push_back(*cs.layers[i].thickness);
    return v;
}

// Transfer-matrix dispersion function, normalized per step so the returned
// value is O(1). Zero exactly at guided modes.
inline double dispersion(const StackView& v, double n_eff) {
    const double N2 = n_eff * n_eff;
    const std::size_t last = v.n.size() - 1;

    double g_bot = std::sqrt(std::max(N2 - v.n[0] * v.n[0], 0.0));
    double g_top = std::sqrt(std::max(N2 - v.n[last] * v.n[last], 0.0));

    double psi = 1.0;
    double w = g_bot / v.q(0);  // w = psi' / (k0 q)
    for (std::size_t i = 1; i < last; ++i) {
        const double diff = v.n[i] * v.n[i] - N2;
        const double kap = std::sqrt(std::fabs(diff));
        const double theta = v.k0 * v.d[i - 1] * kap;
        const double qi = v.q(i);
        double p2, w2;
        if (kap < 1e-14) {  // grazing layer, linear field
            p2 = psi + w * qi * v.k0 * v.d[i - 1];
            w2 = w;
        } else if (diff > 0.0) {
            p2 = psi * std::cos(theta) + w * (qi / kap) * std::sin(theta);
            w2 = -psi * (kap / qi) * std::sin(theta) + w * std::cos(theta);
        } else {
            p2 = psi * std::cosh(theta) + w * (qi / kap) * std::sinh(theta);
            w2 = psi * (kap / qi) * std::sinh(theta) + w * std::cosh(theta);
        }
        psi = p2;
        w = w2;
        const double s = std::max(std::fabs(psi), std::fabs(w));
        if (s > 0.0) {
            psi /= s;
            w /= s;
        }
    }
    double f = w + (g_top / v.q(last)) * psi;
    const double s = std::max(std::fabs(psi), std::fabs(w));
    return s > 0.0 ? f / std::max(1.0, s) : f;
}

// Scan parameter u with n_eff^2 = n_core_max^2 - u^2; modes are about evenly
// spaced in u, so a uniform u grid separates closely packed high-order modes.
struct Bracket {
    double u_lo, u_hi;
};

inline std::vector<double> find_roots(const StackView& v, double n_clad_max,
                                      double n_core_max,
                                      std::size_t max_roots) {
    const double u_max =
        std::sqrt(n_core_max * n_core_max - n_clad_max * n_clad_max);

    // Mode-count estimate sets the scan density.
    double vtot = 0.0;
    for (std::size_t i = 1; i + 1 < v.n.size(); ++i) {
        const double nn = v.n[i] * v.n[i] - n_clad_max * n_clad_max;
        if (nn > 0.0) vtot += v.k0 * v.d[i - 1] * std::sqrt(nn) / M_PI;
    }
    const std::size_t scan =
        std::max<std::size_t>(1000, static_cast<std::size_t>(20.0 * (vtot + 2.0)));

    auto neff_of = [&](double u) {
        return std::sqrt(std::max(n_core_max * n_core_max - u * u, 0.0));
    };

    const double margin = u_max * 1e-9;
    std::vector<double> roots;
    double u_prev = margin;
    double f_prev = dispersion(v, neff_of(u_prev));
    for (std::size_t i = 1; i <= scan && roots.size() < max_roots; ++i) {
        const double u = margin + (u_max - 2.0 * margin) * double(i) / double(scan);
        const double f = dispersion(v, neff_of(u));
        if (f == 0.0) {
            roots.push_back(neff_of(u));
        } else if (f_prev * f < 0.0) {
            double lo = u_prev, hi = u;
            double flo = f_prev;
            for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = dispersion(v, neff_of(mid));
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (flo * fm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push_back(neff_of(0.5 * (lo + hi)));
        }
        u_prev = u;
        f_prev = f;
    }
    return roots;  // descending n_eff
}

}  // namespace detail

struct ModeSolution {
    double n_eff = 0.0;
    double n_g = 0.0;
    std::vector<FieldSample> field;     // E-dominant profile, unit peak
    double S_wg = 0.0;                  // dn_eff / dn_analyte
    double dneff_dT = 0.0;              // 1/degC
    double confinement_analyte = 0.0;   // E^2 fraction in analyte layers
    double dispersion_residual = 0.0;
    Polarization polarization = Polarization::TE;
    double wavelength = 0.0;

    // Piecewise-analytic evaluator, same normalization as `field`.
    double field_at(double x) const;

    std::vector<detail::LayerField> pieces;  // internal representation
    double k0 = 0.0;
    double peak = 1.0;
};

inline double ModeSolution::field_at(double x) const {
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const detail::LayerField& p = pieces[i];
        const bool bottom = (i == 0);
        const bool top = (i + 1 == pieces.size());
        if (!top && x > p.x1) continue;
        const double s = k0 * (x - (bottom ? p.x1 : p.x0));
        double psi;
        if (bottom) {
            psi = p.a * std::exp(p.kappa * std::min(s, 0.0));
        } else if (top) {
            psi = p.a * std::exp(-p.kappa * std::max(s, 0.0));
        } else if (p.oscillatory) {
            psi = p.a * std::cos(p.kappa * s) + p.b * std::sin(p.kappa * s);
        } else {
            psi = p.a * std::cosh(p.kappa * s) + p.b * std::sinh(p.kappa * s);
        }
        return psi * p.inv_n2 / peak;
    }
    return 0.0;
}

namespace detail {

// Exact integral of psi^2 (weighted by the E-profile weight) over a piece,
// between dimensionless offsets s0 < s1 measured from the piece origin.
inline double piece_energy(const LayerField& p, double s0, double s1,
                           bool bottom, bool top) {
    const double w2 = p.inv_n2 * p.inv_n2;
    const double k = p.kappa;
    if (bottom) {  // a^2 exp(2 k s), s in (-inf, 0]
        return w2 * p.a * p.a / (2.0 * k);
    }
    if (top) {  // a^2 exp(-2 k s), s in [0, inf)
        return w2 * p.a * p.a / (2.0 * k);
    }
    if (k < 1e-14) {
        const double ds = s1 - s0;
        return w2 * p.a * p.a * ds;  // grazing: psi ~ const over thin layer
    }
    auto prim = [&](double s) {
        const double twoks = 2.0 * k * s;
        if (p.oscillatory) {
            return 0.5 * (p.a * p.a + p.b * p.b) * s +
                   (p.a * p.a - p.b * p.b) * std::sin(twoks) / (4.0 * k) -
                   p.a * p.b * std::cos(twoks) / (2.0 * k);
        }
        return 0.5 * (p.a * p.a - p.b * p.b) * s +
               (p.a * p.a + p.b * p.b) * std::sinh(twoks) / (4.0 * k) +
               p.a * p.b * std::cosh(twoks) / (2.0 * k);
    };
    return w2 * (prim(s1) - prim(s0));
}

// Peak |psi * inv_n2| of a piece over its extent (dimensionless offsets).
inline double piece_peak(const LayerField& p, double s0, double s1, bool bottom,
                         bool top) {
    if (bottom || top) return std::fabs(p.a) * p.inv_n2;
    if (p.kappa < 1e-14) return std::fabs(p.a) * p.inv_n2;
    if (!p.oscillatory) {
        // |psi| is convex where psi != 0; extremes sit at the endpoints
        const double v0 = p.a * std::cosh(p.kappa * s0) + p.b * std::sinh(p.kappa * s0);
        const double v1 = p.a * std::cosh(p.kappa * s1) + p.b * std::sinh(p.kappa * s1);
        return std::max(std::fabs(v0), std::fabs(v1)) * p.inv_n2;
    }
    const double R = std::hypot(p.a, p.b);
    const double phi = std::atan2(p.b, p.a);  // psi = R cos(k s - phi)
    const double t0 = p.kappa * s0 - phi, t1 = p.kappa * s1 - phi;
    double best = std::max(std::fabs(std::cos(t0)), std::fabs(std::cos(t1)));
    // interior extrema at multiples of pi
    const double k0i = std::ceil(t0 / M_PI);
    if (k0i * M_PI <= t1) best = 1.0;
    return R * best * p.inv_n2;
}

}  // namespace detail

inline int count_guided(const CrossSection& cs) {
    cs.validate();
    detail::StackView v = detail::make_view(cs);
    const double n_clad = std::max(v.n.front(), v.n.back());
    const double n_core = *std::max_element(v.n.begin(), v.n.end());
    return static_cast<int>(
        detail::find_roots(v, n_clad, n_core, 10000).size());
}

inline double dispersion_residual(const CrossSection& cs, double n_eff) {
    detail::StackView v = detail::make_view(cs);
    return std::fabs(detail::dispersion(v, n_eff));
}

/// Solve for the mode_order-th guided mode of the stack (0 = fundamental).
/// The sampled profile spans the finite layers plus three decay lengths into
/// each outer layer. Group index comes from re-solves at +-0.1 nm.
inline ModeSolution solve_slab(const CrossSection& cs, int mode_order,
                               std::size_t samples = 4001,
                               bool with_group_index = true) {
    cs.validate();
    if (mode_order < 0) throw OutOfRange("mode_order must be non-negative");

    detail::StackView v = detail::make_view(cs);
    const double n_clad = std::max(v.n.front(), v.n.back());
    const double n_core = *std::max_element(v.n.begin(), v.n.end());

    std::vector<double> roots = detail::find_roots(
        v, n_clad, n_core, static_cast<std::size_t>(mode_order) + 1);
    if (roots.size() <= static_cast<std::size_t>(mode_order))
        throw NoGuidedMode("stack guides " + std::to_string(roots.size()) +
                           " mode(s), order " + std::to_string(mode_order) +
                           " requested");

    const double n_eff = roots[static_cast<std::size_t>(mode_order)];
    const double N2 = n_eff * n_eff;

    ModeSolution sol;
    sol.n_eff = n_eff;
    sol.polarization = cs.polarization;
    sol.wavelength = cs.wavelength;
    sol.k0 = v.k0;
    sol.dispersion_residual = dispersion_residual(cs, n_eff);

    // Rebuild the piecewise field at the root.
    const std::size_t nl = v.n.size();
    std::vector<detail::LayerField> pieces(nl);
    double x = 0.0;  // bottom finite interface at x = 0
    {
        detail::LayerField& pb = pieces[0];
        pb.kappa = std::sqrt(std::max(N2 - v.n[0] * v.n[0], 0.0));
        pb.a = 1.0;
        pb.x0 = -std::numeric_limits<double>::infinity();
        pb.x1 = 0.0;
        pb.oscillatory = false;
        pb.inv_n2 = cs.polarization == Polarization::TM
                        ? 1.0 / (v.n[0] * v.n[0])
                        : 1.0;
    }
    double psi = 1.0;
    double w = pieces[0].kappa / v.q(0);
    for (std::size_t i = 1; i + 1 < nl; ++i) {
        detail::LayerField& p = pieces[i];
        const double diff = v.n[i] * v.n[i] - N2;
        p.kappa = std::sqrt(std::fabs(diff));
        p.oscillatory = diff > 0.0;
        p.x0 = x;
        x += v.d[i - 1];
        p.x1 = x;
        p.inv_n2 = cs.polarization == Polarization::TM
                       ? 1.0 / (v.n[i] * v.n[i])
                       : 1.0;
        const double qi = v.q(i);
        // coefficients from the incoming (psi, w)
        if (p.kappa < 1e-14) {
            p.a = psi;
            p.b = w * qi;  // linear term slope in s
        } else if (p.oscillatory) {
            p.a = psi;
            p.b = w * qi / p.kappa;
        } else {
            p.a = psi;
            p.b = w * qi / p.kappa;
        }
        // advance to the layer end
        const double theta = v.k0 * v.d[i - 1] * p.kappa;
        double p2, w2;
        if (p.kappa < 1e-14) {
            p2 = psi + w * qi * v.k0 * v.d[i - 1];
            w2 = w;
        } else if (p.oscillatory) {
            p2 = psi * std::cos(theta) + w * (qi / p.kappa) * std::sin(theta);
            w2 = -psi * (p.kappa / qi) * std::sin(theta) + w * std::cos(theta);
        } else {
            p2 = psi * std::cosh(theta) + w * (qi / p.kappa) * std::sinh(theta);
            w2 = psi * (p.kappa / qi) * std::sinh(theta) + w * std::cosh(theta);
        }
        psi = p2;
        w = w2;
    }
    {
        detail::LayerField& pt = pieces[nl - 1];
        pt.kappa = std::sqrt(std::max(N2 - v.n[nl - 1] * v.n[nl - 1], 0.0));
        pt.a = psi;  // pure decay; residual growing term is the dispersion error
        pt.x0 = x;
        pt.x1 = std::numeric_limits<double>::infinity();
        pt.oscillatory = false;
        pt.inv_n2 = cs.polarization == Polarization::TM
                        ? 1.0 / (v.n[nl - 1] * v.n[nl - 1])
                        : 1.0;
    }
    sol.pieces = pieces;

    // Unit-peak normalization from per-piece analytic extrema.
    double peak = 0.0;
    for (std::size_t i = 0; i < nl; ++i) {
        const bool bottom = (i == 0), top = (i + 1 == nl);
        const double s1 = (bottom || top) ? 0.0 : v.k0 * v.d[i - 1];
        peak = std::max(peak, detail::piece_peak(pieces[i], 0.0, s1, bottom, top));
    }
    sol.peak = peak > 0.0 ? peak : 1.0;

    // Confinement: exact piecewise integrals of the weighted intensity.
    double total = 0.0, analyte = 0.0;
    for (std::size_t i = 0; i < nl; ++i) {
        const bool bottom = (i == 0), top = (i + 1 == nl);
        const double s1 = (bottom || top) ? 0.0 : v.k0 * v.d[i - 1];
        const double e = detail::piece_energy(pieces[i], 0.0, s1, bottom, top);
        total += e;
        if (cs.layers[i].is_analyte) analyte += e;
    }
    sol.confinement_analyte = total > 0.0 ? analyte / total : 0.0;

    // Sampled profile: finite stack plus 3 decay lengths each side.
    const double span_bot = 3.0 / (v.k0 * std::max(pieces[0].kappa, 1e-6));
    const double span_top = 3.0 / (v.k0 * std::max(pieces[nl - 1].kappa, 1e-6));
    const double x_lo = -span_bot;
    const double x_hi = x + span_top;
    sol.field.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double xi =
            x_lo + (x_hi - x_lo) * double(i) / double(samples - 1);
        sol.field[i] = {xi, sol.field_at(xi)};
    }

    if (with_group_index) {
        const double h = 0.1e-9;
        CrossSection lo = cs, hi = cs;
        lo.wavelength -= h;
        hi.wavelength += h;
        const double n_lo = solve_slab(lo, mode_order, 2, false).n_eff;
        const double n_hi = solve_slab(hi, mode_order, 2, false).n_eff;
        const double dn_dl = (n_hi - n_lo) / (2.0 * h);
        sol.n_g = n_eff - cs.wavelength * dn_dl;
    } else {
        sol.n_g = n_eff;
    }
    return sol;
}

/// Central-difference waveguide sensitivity dn_eff/dn_analyte.
inline double waveguide_sensitivity(const CrossSection& cs, int mode_order,
                                    double delta = 1e-4) {
    cs.validate();
    if (delta < 1e-6 || delta > 1e-2)
        throw OutOfRange("delta must lie in [1e-6, 1e-2]");
    if (!cs.has_analyte()) return 0.0;

    const CrossSection minus = cs.shifted_analyte(-delta);
    const CrossSection plus = cs.shifted_analyte(+delta);
    if (count_guided(minus) != count_guided(plus))
        throw DegenerateMode(
            "analyte perturbation straddles a mode cutoff; reduce delta");
    const double n_m = solve_slab(minus, mode_order, 2, false).n_eff;
    const double n_p = solve_slab(plus, mode_order, 2, false).n_eff;
    return (n_p - n_m) / (2.0 * delta);
}

/// Central-difference thermo-optic response dn_eff/dT.
inline double thermo_optic_coefficient(const CrossSection& cs, int mode_order,
                                       double deltaT = 1.0) {
    cs.validate();
    if (deltaT < 0.01 || deltaT > 10.0)
        throw OutOfRange("deltaT must lie in [0.01, 10] degC");
    const double n_m =
        solve_slab(cs.shifted_temperature(-deltaT), mode_order, 2, false).n_eff;
    const double n_p =
        solve_slab(cs.shifted_temperature(+deltaT), mode_order, 2, false).n_eff;
    return (n_p - n_m) / (2.0 * deltaT);
}

/// Length-weighted hybrid sensitivity, rho = slot fraction of the ring.
inline double equivalent_sensitivity(double rho, double S_strip,
                                     double S_slot) {
    if (rho < 0.0 || rho > 1.0)
        throw OutOfRange("rho must lie in [0, 1]");
    return (1.0 - rho) * S_strip + rho * S_slot;
}

/// Solve a mode and fill in all derived quantities (S_wg, dn/dT).
inline ModeSolution characterize(const CrossSection& cs, int mode_order,
                                 std::size_t samples = 4001) {
    ModeSolution sol = solve_slab(cs, mode_order, samples);
    if (cs.has_analyte()) sol.S_wg = waveguide_sensitivity(cs, mode_order);
    sol.dneff_dT = thermo_optic_coefficient(cs, mode_order);
    return sol;
}

}  // namespace ringlink::modesolver
