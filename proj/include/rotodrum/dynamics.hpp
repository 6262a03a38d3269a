#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rotodrum/domain.hpp"
#include "rotodrum/frames.hpp"

namespace rotodrum {

class Rng;

enum class EventKind { BallBall, BallWall, Horizon };

struct Event {
  EventKind kind{EventKind::Horizon};
  double time{0.0};  // absolute
  int i{-1};
  int j{-1};     // second ball for BallBall
  int face{-1};  // wall face for BallWall
};

struct LogEntry {
  std::size_t index{0};
  Event event;
  double ef_pre{0.0};
  double ef_post{0.0};
  double ek_pre{0.0};
  double ek_post{0.0};
};

class CollisionLog {
 public:
  void append(const LogEntry& entry) { entries_.push_back(entry); }
  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// max |EF_post - EF_pre| / (1 + |EF_pre|) over all entries.
  double max_relative_ef_drift() const;
  double max_ek() const;

  /// Columns: event_index,time,kind,i,j,EF_pre,EF_post,EK_pre,EK_post
  void write_csv(std::ostream& os) const;

 private:
  std::vector<LogEntry> entries_;
};

/// Smallest t > 0 at which the two balls touch while approaching, or nullopt.
std::optional<double> time_to_pair_collision(const VecD& xi, const VecD& vi, double ri,
                                             const VecD& xj, const VecD& vj, double rj);

struct WallHit {
  double dt{std::numeric_limits<double>::infinity()};
  int face{kLateralFace};
};

/// Time until each wall face is hit by a ball of radius r starting at x (inertial,
/// at absolute time t0). Faces that are never reached are omitted.
std::vector<WallHit> wall_hits(const Domain& dom, const VecD& x, const VecD& v, double r,
                               double t0, double omega);

/// Time increment to the first wall hit (infinity if the ball never reaches a
/// wall, e.g. motion parallel to the axis of a torus). Throws NoWallHit when the
/// star-drum search finds no crossing within its horizon.
double time_to_wall(const Domain& dom, const VecD& x, const VecD& v, double r, double t0,
                    double omega);

/// Elastic collision of two balls touching at distance `contact_distance`
/// (ri + rj). xj - xi must already be the minimum-image separation.
std::pair<VecD, VecD> resolve_ball_ball(const VecD& xi, const VecD& vi, double mi, const VecD& xj,
                                        const VecD& vj, double mj, double contact_distance);

/// Specular reflection in frame F, result in the inertial frame.
VecD resolve_wall_specular(const Domain& dom, const VecD& x, const VecD& v, double t,
                           double omega, double r);

/// Reflection of the frame-F velocity u = v - omega L(x) about the contact
/// normal. Throws NotOutgoing if u points into the domain.
VecD specular_about(const WallContact& contact, const VecD& x, const VecD& v, double omega);

/// Wall reflection law consumed by advance().
class WallLaw {
 public:
  virtual ~WallLaw() = default;
  virtual VecD reflect(const Domain& dom, const WallContact& contact, const VecD& x,
                       const VecD& v, double t, double omega) = 0;
};

class SpecularLaw final : public WallLaw {
 public:
  VecD reflect(const Domain& dom, const WallContact& contact, const VecD& x, const VecD& v,
               double t, double omega) override;
};

struct AdvanceOptions {
  std::size_t max_events{std::numeric_limits<std::size_t>::max()};
  bool record_log{true};
  double nudge{1e-12};
  double tie_tolerance{1e-12};
  /// Called after each resolved collision with the post-event state.
  std::function<void(const Event&, const SystemState&)> on_event;
  /// Checked after each resolved collision; returning true ends the run.
  std::function<bool()> stop_requested;
};

struct AdvanceResult {
  SystemState state;
  CollisionLog log;
  std::size_t events{0};
  bool reached_horizon{false};
};

/// Event-driven evolution up to absolute time `horizon` or `max_events`
/// collisions, whichever comes first.
AdvanceResult advance(SystemState state, const Domain& dom, const FrameParams& fp,
                      double horizon, WallLaw& law, const AdvanceOptions& options = {});

/// Displaces every coordinate by an independent uniform amount in [-scale, scale].
SystemState perturb_state(const SystemState& state, Rng& rng, double scale = 1e-9);

/// 2 E^F + 2 M omega^2 R^2, the ceiling on inertial kinetic energy.
double no_fermi_bound(const SystemState& state, const Domain& dom, const FrameParams& fp);

}  // namespace rotodrum
