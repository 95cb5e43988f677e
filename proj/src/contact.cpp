#include "vibrobot/contact.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace vibrobot {

const LegMatrix& ContactState::anchors() const {
  if (mode_ != ContactMode::Stuck) throw std::logic_error("contact anchors requested while sliding");
  return anchors_;
}

namespace {

Eigen::Matrix2d rotation(double phi) {
  return Eigen::Rotation2Dd(phi).toRotationMatrix();
}

}  // namespace

LegKinematics leg_kinematics(const RobotParams& p, const Eigen::Vector2d& com,
                             const Eigen::Vector2d& com_velocity, double phi, double phidot) {
  const LegMatrix body = leg_positions(p);
  const Eigen::Matrix2d R = rotation(phi);
  LegKinematics k;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d r = R * body.row(i).transpose();
    k.position.row(i) = (com + r).transpose();
    // omega x r in the plane: (-phidot * r_y, phidot * r_x)
    k.velocity.row(i) = (com_velocity + phidot * Eigen::Vector2d(-r.y(), r.x())).transpose();
  }
  return k;
}

Eigen::Vector3d normal_loads(const RobotParams& p, double vertical_e, double vertical_d) {
  const double total = p.M * p.g + vertical_e + vertical_d;
  if (total <= 0.0) return Eigen::Vector3d::Zero();

  const LegMatrix legs = leg_positions(p);
  const Eigen::Vector2d mount_e = motor_e_mount(p);
  const Eigen::Vector2d mount_d = motor_d_mount(p);
  // Moments of the applied vertical loads about the body axes.
  const Eigen::Vector2d moment = mount_e * vertical_e + mount_d * vertical_d;

  Eigen::Matrix3d A;
  A.row(0).setOnes();
  A.row(1) = legs.col(0).transpose();
  A.row(2) = legs.col(1).transpose();
  const Eigen::Vector3d b(total, moment.x(), moment.y());
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(A);
  assert(std::abs(lu.determinant()) > 0.0);
  Eigen::Vector3d n = lu.solve(b);

  int lifted = -1;
  for (int i = 0; i < 3; ++i) {
    if (n[i] < 0.0 && (lifted < 0 || n[i] < n[lifted])) lifted = i;
  }
  if (lifted < 0) return n;

  // Two legs left: place the load centre on the segment between them (lever rule).
  const int i0 = (lifted + 1) % 3;
  const int i1 = (lifted + 2) % 3;
  const Eigen::Vector2d p0 = legs.row(i0).transpose();
  const Eigen::Vector2d p1 = legs.row(i1).transpose();
  const Eigen::Vector2d centre = moment / total;
  const Eigen::Vector2d span = p1 - p0;
  const double t = std::clamp((centre - p0).dot(span) / span.squaredNorm(), 0.0, 1.0);
  n.setZero();
  n[i0] = total * (1.0 - t);
  n[i1] = total - n[i0];
  return n;
}

LegMatrix spring_forces(const RobotParams& p, const ContactState& contact,
                        const LegMatrix& leg_world, double phi) {
  if (!contact.is_stuck()) return LegMatrix::Zero();
  const Eigen::Matrix2d Rt = rotation(phi).transpose();
  LegMatrix f;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d deflection = (leg_world.row(i) - contact.anchors().row(i)).transpose();
    f.row(i) = (Rt * (-p.k * deflection)).transpose();
  }
  return f;
}

LegMatrix friction_forces(const RobotParams& p, const ContactState& contact,
                          const LegKinematics& legs, const Eigen::Vector3d& normal, double phi) {
  if (contact.is_stuck()) return spring_forces(p, contact, legs.position, phi);

  const Eigen::Matrix2d Rt = rotation(phi).transpose();
  LegMatrix f = LegMatrix::Zero();
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d v = legs.velocity.row(i).transpose();
    const double speed = std::max(v.norm(), p.friction_v_reg);
    f.row(i) = (Rt * (-p.mu * normal[i] / speed * v)).transpose();
  }
  return f;
}

ContactState update_mode(const ContactState& contact, const ModeInputs& in, double mu, double eps_v) {
  if (contact.is_stuck()) {
    const double demand = in.spring.rowwise().norm().sum();
    if (demand > mu * in.normal.sum()) return ContactState::sliding();
    return contact;
  }
  if (in.com_speed < eps_v || in.com_velocity_reversed) return ContactState::stuck(in.leg_world);
  return contact;
}

}  // namespace vibrobot
