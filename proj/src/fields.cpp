#include "rimech/fields.hpp"

#include <cmath>

#include "rimech/errors.hpp"

namespace rimech::fields {

std::function<double(double)> constant(double value) {
    return [value](double) { return value; };
}

std::function<double(double)> polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) {
        throw Error(ErrorKind::schema_error, "polynomial needs at least one coefficient");
    }
    return [coeffs = std::move(coeffs)](double s) {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
        return acc;
    };
}

std::function<double(double)> sinusoid(double offset, double amplitude, double omega,
                                       double phase) {
    return [=](double s) { return offset + amplitude * std::sin(omega * s + phase); };
}

std::function<double(double)> bump(double base, double amplitude, double center, double width) {
    if (!(width > 0.0)) {
        throw Error(ErrorKind::schema_error, "bump width must be positive");
    }
    const double half_pi_over_w = M_PI / (2.0 * width);
    return [=](double s) {
        const double u = s - center;
        if (std::abs(u) >= width) return base;
        const double c = std::cos(half_pi_over_w * u);
        return base + amplitude * c * c;
    };
}

double bump_excess_integral(double amplitude, double width) { return amplitude * width; }

std::function<double(double)> weak_field_u(double u0, double omega) {
    return [=](double s) { return u0 * std::sin(omega * s); };
}

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {"constant", "polynomial", "sinusoid", "bump",
                                                   "weak-field-U"};
    return names;
}

std::function<double(double)> make(const std::string& name, const std::vector<double>& params) {
    auto need = [&](std::size_t n, const char* shape) {
        if (params.size() != n) {
            throw Error(ErrorKind::schema_error,
                        "field family '" + name + "' expects " + shape);
        }
    };
    if (name == "constant") {
        need(1, "1 parameter [value]");
        return constant(params[0]);
    }
    if (name == "polynomial") {
        if (params.empty()) {
            throw Error(ErrorKind::schema_error,
                        "field family 'polynomial' expects coefficients [c0, c1, ...]");
        }
        return polynomial(params);
    }
    if (name == "sinusoid") {
        need(4, "4 parameters [offset, amplitude, omega, phase]");
        return sinusoid(params[0], params[1], params[2], params[3]);
    }
    if (name == "bump") {
        need(4, "4 parameters [base, amplitude, center, width]");
        return bump(params[0], params[1], params[2], params[3]);
    }
    if (name == "weak-field-U") {
        need(2, "2 parameters [u0, omega]");
        return weak_field_u(params[0], params[1]);
    }
    std::string known;
    for (const auto& n : family_names()) {
        if (!known.empty()) known += ", ";
        known += n;
    }
    throw Error(ErrorKind::schema_error, "unknown field family '" + name + "' (known: " + known + ")");
}

}  // namespace rimech::fields
