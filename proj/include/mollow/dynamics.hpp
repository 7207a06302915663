#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mollow/system_model.hpp"

namespace mollow {

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// (all within the tolerances below).
class DensityMatrix {
 public:
  static constexpr double kHermiticityTol = 1e-9;
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kMinEigenvalue = -1e-8;

  DensityMatrix(SpaceDims dims, CMatrix matrix);

  [[nodiscard]] const SpaceDims& dims() const { return dims_; }
  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }

  [[nodiscard]] Complex expect(const Operator& op) const { return (op.matrix() * matrix_).trace(); }
  [[nodiscard]] double population(int qubit, int photons) const;
  /// Total population of the highest Fock level.
  [[nodiscard]] double top_fock_population() const;

 private:
  SpaceDims dims_;
  CMatrix matrix_;
};

/// Solves L vec(rho) = 0 with tr(rho) = 1 by dense LU, the equation for the
/// diagonal element (trace_state, trace_state) being replaced by the trace
/// constraint. Throws NumericalError for degenerate or unconverged solutions.
DensityMatrix steady_state(const Superoperator& liouvillian, int trace_state = 0);

/// exp(L dt) as a superoperator (dt in ns).
Superoperator propagator(const Superoperator& liouvillian, double dt);

/// g(tau) = <a^dag(0) a(tau)> on tau_k = k * dtau, k = 0..n_steps.
struct CorrelationTrace {
  double dtau = 0.0;
  std::vector<Complex> values;
  Complex coherent_offset = 0.0;  ///< |<a>_ss|^2
  bool unresolved = false;        ///< tail did not decay to the coherent offset

  [[nodiscard]] double t_max() const { return dtau * static_cast<double>(values.empty() ? 0 : values.size() - 1); }
  [[nodiscard]] std::vector<double> tau_grid() const;
};

/// Evaluates the correlation by the quantum regression theorem, stepping
/// vec(rho a^dag) with the single-step propagator exp(L dtau).
CorrelationTrace correlation(const Superoperator& liouvillian, const DensityMatrix& rho_ss, const Operator& a,
                             double t_max, int n_steps);

/// Uniform frequency grid in GHz, relative to the laser.
struct SpectrumGrid {
  double omega_min = -150.0;
  double omega_max = 150.0;
  double spacing = 0.1;

  [[nodiscard]] std::vector<double> points() const;
  [[nodiscard]] double max_abs() const;
};

enum class Taper { none, cosine };

struct SpectrumTrace {
  std::vector<double> omega;
  std::vector<double> values;       ///< incoherent spectral density
  double coherent_amplitude = 0.0;  ///< integrated weight of the elastic line at omega' = 0

  [[nodiscard]] std::size_t size() const { return omega.size(); }
  [[nodiscard]] double spacing() const { return omega.size() > 1 ? omega[1] - omega[0] : 0.0; }
  /// Trapezoidal integral of the incoherent density over the grid.
  [[nodiscard]] double integral() const;
};

/// S(w) = Re int_0^T exp(i 2pi w tau) (g(tau) - |<a>|^2) dtau by the trapezoid rule.
/// Throws InvalidArgument when the grid spacing is finer than 1 / (2 T_max).
SpectrumTrace spectrum(const CorrelationTrace& corr, const SpectrumGrid& grid, Taper taper = Taper::none);

/// Which system operator the emission spectrum is taken of.
enum class Observable { cavity, dot };

/// The dot's own emission for the bare two-level validation drive, the cavity otherwise.
Observable default_observable(const SystemParams& p);

struct SimulationSettings {
  SpectrumGrid grid;
  std::optional<double> t_max;  ///< ns; default from slowest_rate()
  double t_max_factor = 8.0;
  double t_max_cap = 200.0;
  double oversample = 2.0;  ///< dtau = 1 / (2 * oversample * max|omega|)
  Observable observable = Observable::cavity;
  Taper taper = Taper::none;
};

/// Slowest relevant decay rate in 1/ns: min(pi (gamma + gamma_d), spectral gap of L).
double slowest_rate(const Superoperator& liouvillian, const SystemParams& p);

struct SimulatedSpectrum {
  SpectrumTrace trace;
  CorrelationTrace correlation;
  int fock_dim = 0;
  double t_max = 0.0;
  double cavity_photons = 0.0;        ///< <a^dag a>
  double excited_population = 0.0;
  double top_fock_population = 0.0;
};

/// params -> Liouvillian -> steady state -> correlation -> spectrum.
SimulatedSpectrum simulate_spectrum(const SystemParams& p, const SimulationSettings& settings);

using LinewidthExtractor = std::function<double(const SpectrumTrace&)>;

struct ConvergedSpectrum {
  SimulatedSpectrum result;
  int fock_used = 0;
  std::vector<int> fock_history;
  std::vector<double> linewidth_history;
};

/// Doubles fock_dim from `start` until the extracted linewidth changes by less
/// than `rel_tol`; throws NumericalError above `max_fock`.
ConvergedSpectrum converge_fock(SystemParams p, const SimulationSettings& settings, const LinewidthExtractor& linewidth,
                                int start = 10, double rel_tol = 5e-3, int max_fock = 80);

}  // namespace mollow
