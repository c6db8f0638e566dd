#pragma once

#include <functional>
#include <string>
#include <vector>

namespace rimech::fields {

// The built-in scalar field families scenario configs may reference.  Every
// family is a smooth callable of one variable; configs name them instead of
// supplying code.

std::function<double(double)> constant(double value);

// coeffs[0] + coeffs[1] s + coeffs[2] s^2 + ...
std::function<double(double)> polynomial(std::vector<double> coeffs);

// offset + amplitude * sin(omega s + phase)
std::function<double(double)> sinusoid(double offset, double amplitude, double omega,
                                       double phase);

// base + amplitude * cos^2(pi (s - center) / (2 width)) inside |s-center| < width,
// base outside.  C^1 everywhere; the excess integral is exactly amplitude*width.
std::function<double(double)> bump(double base, double amplitude, double center, double width);
double bump_excess_integral(double amplitude, double width);

// u0 * sin(omega s): the oscillating weak-field potential used by the
// gravitational energy-shift runs.
std::function<double(double)> weak_field_u(double u0, double omega);

// Registry lookup: family name + positional parameters.  Unknown names or
// wrong arity throw schema errors naming the problem.
std::function<double(double)> make(const std::string& name, const std::vector<double>& params);

// Names accepted by make(), for validation messages.
const std::vector<std::string>& family_names();

}  // namespace rimech::fields
