#pragma once

#include <Eigen/Dense>

#include "vibrobot/params.hpp"

namespace vibrobot {

using LegMatrix = Eigen::Matrix<double, 3, 2>;  // one row per leg (a, b, c)

enum class ContactMode { Stuck, Sliding };

/// Global stick/slip mode. Anchors are the world points the leg springs are
/// attached to; they exist only while stuck.
class ContactState {
 public:
  static ContactState stuck(const LegMatrix& anchors) { return ContactState(ContactMode::Stuck, anchors); }
  static ContactState sliding() { return ContactState(ContactMode::Sliding, LegMatrix::Zero()); }

  ContactMode mode() const { return mode_; }
  bool is_stuck() const { return mode_ == ContactMode::Stuck; }
  /// Valid only when stuck.
  const LegMatrix& anchors() const;

  bool operator==(const ContactState& o) const { return mode_ == o.mode_ && anchors_ == o.anchors_; }

 private:
  ContactState(ContactMode m, const LegMatrix& a) : mode_(m), anchors_(a) {}
  ContactMode mode_;
  LegMatrix anchors_;
};

/// Normal and tangential leg forces. Tangential forces are in the body frame.
struct LegLoads {
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  LegMatrix tangential = LegMatrix::Zero();
};

/// World-frame leg positions and velocities for a planar pose.
struct LegKinematics {
  LegMatrix position;
  LegMatrix velocity;
};

LegKinematics leg_kinematics(const RobotParams& p, const Eigen::Vector2d& com,
                             const Eigen::Vector2d& com_velocity, double phi, double phidot);

/// Quasi-static normal loads from weight plus the motors' vertical forces
/// (downward positive). A leg that would pull is lifted and the load is shared by
/// the remaining two; a non-positive total load means all legs are unloaded.
Eigen::Vector3d normal_loads(const RobotParams& p, double vertical_e, double vertical_d);

/// Tangential leg-spring forces (body frame) for a stuck contact.
LegMatrix spring_forces(const RobotParams& p, const ContactState& contact,
                        const LegMatrix& leg_world, double phi);

/// Per-leg tangential forces in the body frame: leg springs when stuck,
/// kinetic Coulomb friction opposing each leg's velocity when sliding.
LegMatrix friction_forces(const RobotParams& p, const ContactState& contact,
                          const LegKinematics& legs, const Eigen::Vector3d& normal, double phi);

struct ModeInputs {
  double com_speed = 0.0;
  /// True when the COM velocity changed direction during the last step
  /// (v_before . v_after <= 0 with a non-zero v_before).
  bool com_velocity_reversed = false;
  LegMatrix spring = LegMatrix::Zero();  // spring forces at the end of the step (stuck only)
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  LegMatrix leg_world = LegMatrix::Zero();
};

/// Stick/slip transition applied once per physics step.
ContactState update_mode(const ContactState& contact, const ModeInputs& in, double mu, double eps_v);

}  // namespace vibrobot
