#pragma once

#include <string>

#include "mollow/operators.hpp"

namespace mollow {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class DriveTarget { cavity, qubit };

/// Representation of the cavity mode inside the truncated space.
///
/// `lab` truncates the bare photon-number basis. `displaced` truncates the
/// basis of b = a - alpha, where alpha is the steady amplitude of the driven
/// empty cavity; the physical cavity operator is then alpha * I + b. Both are
/// the same model before truncation, but the displaced frame needs far fewer
/// Fock levels at strong drive.
enum class Frame { lab, displaced };

/// Physical parameters of the driven dot-cavity system.
///
/// All rates and detunings are ordinary frequencies in GHz (the value of X/2pi).
/// Time is measured in ns, so generators carry an explicit factor of 2pi.
struct SystemParams {
  double delta_c = 0.0;       ///< cavity-laser detuning
  double delta_x = 0.0;       ///< dot-laser detuning
  double g = 15.3;            ///< dot-cavity coupling
  double kappa = 36.0;        ///< cavity energy decay rate
  double gamma = 0.16;        ///< dot spontaneous emission rate
  double gamma_d = 1.0;       ///< pure dephasing rate
  double gamma_ph_ads = 0.0;  ///< phonon rate for the a^dag sigma_- channel
  double gamma_ph_asp = 0.0;  ///< phonon rate for the a sigma_+ channel
  double drive_J = 0.0;       ///< cavity drive amplitude, enters as sqrt(kappa) * J (GHz)
  double omega_direct = 0.0;  ///< Rabi frequency of the direct qubit drive (validation mode)
  DriveTarget drive_target = DriveTarget::cavity;
  int fock_dim = 10;
  Frame frame = Frame::lab;
  bool uncoupled = false;  ///< permits g == 0

  [[nodiscard]] double delta_cx() const { return delta_c - delta_x; }
  [[nodiscard]] SpaceDims dims() const { return SpaceDims::make(fock_dim); }

  /// Throws InvalidArgument when a rate is negative, g == 0 without `uncoupled`,
  /// or a value is not finite.
  void validate() const;

  /// Cavity displacement used in Frame::displaced (0 in the lab frame).
  [[nodiscard]] Complex frame_displacement() const;
};

std::string to_string(DriveTarget target);
std::string to_string(Frame frame);
DriveTarget drive_target_from_string(const std::string& text);
Frame frame_from_string(const std::string& text);

/// Superoperator acting on column-stacked density matrices:
/// vec(A rho B) = (B^T (x) A) vec(rho).
class Superoperator {
 public:
  Superoperator(SpaceDims dims, CMatrix matrix);

  static Superoperator zero(SpaceDims dims);
  static Superoperator left(const Operator& op);   ///< rho -> op rho
  static Superoperator right(const Operator& op);  ///< rho -> rho op

  [[nodiscard]] const SpaceDims& dims() const { return dims_; }
  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
  [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }

  /// Action on an unvectorized D x D matrix.
  [[nodiscard]] CMatrix apply(const CMatrix& rho) const;

  friend Superoperator operator+(const Superoperator& lhs, const Superoperator& rhs);
  friend Superoperator operator-(const Superoperator& lhs, const Superoperator& rhs);
  friend Superoperator operator*(Complex factor, const Superoperator& op);

 private:
  SpaceDims dims_;
  CMatrix matrix_;
};

CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v, Eigen::Index dim);

/// The physical cavity annihilation operator in the frame selected by p.
Operator cavity_operator(const SystemParams& p);

/// H / hbar in GHz.
Operator build_hamiltonian(const SystemParams& p);

/// D(C) rho = C rho C^dag - 1/2 {C^dag C, rho}.
Superoperator dissipator(const Operator& collapse);

/// Full generator in 1/ns: rho_dot = L rho.
Superoperator build_liouvillian(const SystemParams& p);

/// Anti-crossing splitting 2 sqrt(g^2 - (kappa/4)^2) in GHz, or 0 when not split.
double vacuum_rabi_splitting(double g, double kappa);

}  // namespace mollow
