#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vlia/hand.hpp"
#include "vlia/image.hpp"

namespace vlia::synthgym {

enum class Shape { cube, sphere, cylinder, plate, screw, key };
enum class Regime { ID, OOD_position, OOD_object, OOD_scene, OOD_distractors, OOD_lighting };
enum class Embodiment { human, robot };

std::string to_string(Shape s);
std::string to_string(Regime r);
std::string to_string(Embodiment e);
Regime regime_from_string(const std::string& name);
Embodiment embodiment_from_string(const std::string& name);

inline constexpr int kNumColors = 9;
std::string color_name(int color_id);

struct SceneObject {
  Shape shape = Shape::cube;
  int color_id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // table coords in [0,1]^2
};

/// Static description of one tabletop episode. objects[goal_index] is always
/// the plate the instruction refers to; objects[target_index] is the unique
/// object matching the instruction's descriptor.
struct Scene {
  std::vector<SceneObject> objects;
  int target_index = -1;
  int goal_index = -1;
  int background_id = 0;
  double lighting = 1.0;
  uint64_t rng_seed = 0;
  Regime regime = Regime::ID;

  std::string instruction() const;
  const SceneObject& target() const { return objects[static_cast<size_t>(target_index)]; }
  const SceneObject& goal() const { return objects[static_cast<size_t>(goal_index)]; }

  bool operator==(const Scene&) const = default;
};

struct EnvConfig {
  int resolution = 64;
  int fps = 30;
  int gaze_lead_frames = 6;       // K_lead
  double gaze_sigma = 0.01;       // fixation noise, normalized coords
  double low_confidence_frac = 0.05;
  double success_tolerance = 0.05;
  double grab_radius = 0.05;
  double max_speed = 0.03;        // scripted effector speed per frame
  double rate_limit = 0.05;       // env actuation limit per step
  int exec_steps = 8;             // K_exec, receding horizon
};

/// Distribution knobs behind generate_scene. The defaults define the ID
/// training distribution; each OOD regime perturbs exactly one factor.
struct SceneDistribution {
  // target position regions (x_lo, x_hi, y_lo, y_hi)
  Eigen::Vector4d id_target_region{0.15, 0.85, 0.15, 0.42};
  Eigen::Vector4d ood_target_region{0.15, 0.85, 0.46, 0.56};
  Eigen::Vector4d goal_region{0.25, 0.75, 0.62, 0.85};
  std::vector<Shape> id_shapes{Shape::cube, Shape::sphere, Shape::cylinder};
  std::vector<Shape> ood_shapes{Shape::screw, Shape::key};
  std::vector<int> id_colors{0, 1, 2, 3, 4, 5};
  std::vector<int> ood_colors{6, 7, 8};
  std::vector<int> id_backgrounds{0, 1, 2, 3, 4};
  std::vector<int> ood_backgrounds{5, 6, 7};
  int id_max_distractors = 2;   // uniform 0..2
  int ood_min_distractors = 4;  // uniform 4..6
  int ood_max_distractors = 6;
  // OOD lighting is drawn from [0.3,0.7] U [1.3,1.7]; ID lighting is 1.0.
};

/// Deterministic scene generation; each factor draws from its own RNG stream
/// derived from (seed, factor) so unperturbed factors are identical across
/// regimes for the same seed.
Scene generate_scene(uint64_t seed, Regime regime, const SceneDistribution& dist = {});

struct GazeSample {
  double x = 0.5;
  double y = 0.5;
  double confidence = 0.0;
  bool mask = false;
};

struct Frame {
  Image image;
  Eigen::VectorXd state;  // 48, embodiment reading zero-padded
  GazeSample gaze;
  Eigen::Matrix<double, kActionDim, 1> action = Eigen::Matrix<double, kActionDim, 1>::Zero();
  bool hand_left = false;
  bool hand_right = false;
};

struct Demonstration {
  std::vector<Frame> frames;
  Embodiment embodiment = Embodiment::human;
  std::string instruction;
  bool success = false;
};

/// Rasterizes the scene at the configured resolution, optionally with the
/// agent's end-effector marker. Lighting multiplies intensities, clamped to
/// [0,1]. Pixel (r,c) covers table coords ((c+.5)/W, (r+.5)/H).
Image render(const Scene& scene, const std::optional<Eigen::Vector2d>& agent_pose,
             const EnvConfig& cfg = {});

/// Scripted gaze-precedes-action demonstration. The agent fixates the target
/// for at least K_lead frames before the wrist starts moving, reaches the
/// target, then carries it to the goal. Throws ValidationError for targets
/// outside [0,1]^2 and when horizon_frames is shorter than the scripted path.
Demonstration script_demo(const Scene& scene, Embodiment embodiment, int horizon_frames,
                          const EnvConfig& cfg = {});

using PolicyFn = std::function<Eigen::MatrixXd(const Image&, const Eigen::VectorXd& state,
                                               const std::string& instruction)>;

struct RolloutStep {
  Eigen::Vector2d effector;
  Eigen::Vector2d target_position;
  bool grabbed = false;
  bool non_finite_action = false;
};

struct RolloutResult {
  bool success = false;
  bool non_finite_flag = false;
  int steps_taken = 0;
  std::vector<RolloutStep> trajectory;
};

/// Closed-loop evaluation: the policy is queried once per chunk and the first
/// K_exec rows of its H x 48 output are executed. A non-finite action aborts
/// the trial as a flagged failure.
RolloutResult rollout_env(const PolicyFn& policy, const Scene& scene, int max_steps,
                          Embodiment embodiment = Embodiment::robot, const EnvConfig& cfg = {});

/// Scripted closed-loop controller for the scene; closes the loop that
/// script_demo opens. Used as the oracle policy in evaluation.
PolicyFn make_oracle_policy(const Scene& scene, Embodiment embodiment, int horizon,
                            const EnvConfig& cfg = {});

/// Commanded effector position slots for an embodiment within the 48-dim
/// layout (human: left wrist position; robot: arm 0 position).
Eigen::Vector2d effector_from_action(const Eigen::Matrix<double, kActionDim, 1>& action,
                                     Embodiment embodiment);

}  // namespace vlia::synthgym
