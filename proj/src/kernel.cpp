#include "qmr/kernel.hpp"

namespace qmr {

double kernel_value(const KernelSpec& spec, double t) {
    spec.validate();
    if (!(t > 0.0)) throw std::domain_error("kernel_value: t must be positive (kernel singular at 0)");
    return spec.kappa_inf + spec.lambda * std::pow(t, spec.nu - 1.0);
}

double kernel_l2_constant(const KernelSpec& spec, double horizon) {
    spec.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("kernel_l2_constant: horizon must be positive");
    if (spec.lambda > 0.0 && spec.nu <= 0.5)
        throw std::domain_error("kernel_l2_constant: nu <= 1/2, squared kernel not integrable");
    // int_0^T (kinf + lam s^(nu-1))^2 ds, expanded term by term.
    double c = spec.kappa_inf * spec.kappa_inf * horizon;
    if (spec.lambda > 0.0) {
        c += 2.0 * spec.kappa_inf * spec.lambda * std::pow(horizon, spec.nu) / spec.nu;
        c += spec.lambda * spec.lambda * std::pow(horizon, 2.0 * spec.nu - 1.0) / (2.0 * spec.nu - 1.0);
    }
    return c;
}

}  // namespace qmr
