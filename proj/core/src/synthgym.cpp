#include "vlia/synthgym.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vlia/errors.hpp"
#include "vlia/rng.hpp"

namespace vlia::synthgym {

namespace {

// Factor-specific RNG stream ids: unperturbed factors reuse the same stream
// across regimes, so a given seed yields identical draws for them.
constexpr uint64_t kGoalStream = 11;
constexpr uint64_t kPositionStream = 12;
constexpr uint64_t kObjectStream = 13;
constexpr uint64_t kBackgroundStream = 14;
constexpr uint64_t kDistractorStream = 15;
constexpr uint64_t kLightingStream = 16;
constexpr uint64_t kDemoStream = 21;

constexpr double kObjectRadius = 0.06;
constexpr double kPlateRadius = 0.11;
constexpr double kMinObjectSep = 0.13;
constexpr double kMinPlateSep = 0.18;

const char* kShapeWords[] = {"cube", "ball", "cylinder", "plate", "screw", "key"};

struct Rgb {
  float r, g, b;
};

constexpr Rgb kColors[kNumColors] = {
    {0.85f, 0.15f, 0.15f},  // red
    {0.15f, 0.70f, 0.20f},  // green
    {0.20f, 0.30f, 0.85f},  // blue
    {0.90f, 0.85f, 0.15f},  // yellow
    {0.60f, 0.20f, 0.70f},  // purple
    {0.95f, 0.55f, 0.10f},  // orange
    {0.10f, 0.80f, 0.80f},  // cyan
    {0.90f, 0.20f, 0.70f},  // magenta
    {0.95f, 0.95f, 0.95f},  // white
};

const char* kColorWords[kNumColors] = {"red",    "green",  "blue", "yellow", "purple",
                                       "orange", "cyan",   "magenta", "white"};

constexpr Rgb kBackgrounds[8] = {
    {0.35f, 0.30f, 0.28f}, {0.25f, 0.30f, 0.35f}, {0.30f, 0.35f, 0.25f},
    {0.40f, 0.35f, 0.30f}, {0.28f, 0.28f, 0.33f},
    {0.50f, 0.45f, 0.40f}, {0.15f, 0.20f, 0.25f}, {0.45f, 0.30f, 0.45f},
};

Eigen::Vector2d draw_in_region(Rng& rng, const Eigen::Vector4d& region) {
  return {rng.uniform(region[0], region[1]), rng.uniform(region[2], region[3])};
}

bool far_enough(const Eigen::Vector2d& p, const Scene& scene) {
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const double min_sep =
        scene.objects[i].shape == Shape::plate ? kMinPlateSep : kMinObjectSep;
    if ((p - scene.objects[i].position).norm() < min_sep) return false;
  }
  return true;
}

bool in_shape(Shape shape, double dx, double dy) {
  switch (shape) {
    case Shape::cube:
      return std::abs(dx) <= 0.055 && std::abs(dy) <= 0.055;
    case Shape::sphere:
      return dx * dx + dy * dy <= 0.055 * 0.055;
    case Shape::cylinder: {
      const double ex = dx / 0.065, ey = dy / 0.042;
      return ex * ex + ey * ey <= 1.0;
    }
    case Shape::plate:
      return dx * dx + dy * dy <= kPlateRadius * kPlateRadius;
    case Shape::screw:
      return std::max(std::abs(dx), 0.5 * std::abs(dx) + 0.866 * std::abs(dy)) <= 0.042;
    case Shape::key: {
      const bool shaft = std::abs(dx) <= 0.055 && std::abs(dy) <= 0.018;
      const double cx = dx + 0.045;
      const bool bow = cx * cx + dy * dy <= 0.028 * 0.028;
      return shaft || bow;
    }
  }
  return false;
}

}  // namespace

std::string to_string(Shape s) { return kShapeWords[static_cast<int>(s)]; }

std::string to_string(Regime r) {
  switch (r) {
    case Regime::ID: return "ID";
    case Regime::OOD_position: return "OOD_position";
    case Regime::OOD_object: return "OOD_object";
    case Regime::OOD_scene: return "OOD_scene";
    case Regime::OOD_distractors: return "OOD_distractors";
    case Regime::OOD_lighting: return "OOD_lighting";
  }
  return "?";
}

std::string to_string(Embodiment e) {
  return e == Embodiment::human ? "human" : "robot";
}

Regime regime_from_string(const std::string& name) {
  for (Regime r : {Regime::ID, Regime::OOD_position, Regime::OOD_object, Regime::OOD_scene,
                   Regime::OOD_distractors, Regime::OOD_lighting})
    if (to_string(r) == name) return r;
  throw ValidationError("unknown regime: " + name);
}

Embodiment embodiment_from_string(const std::string& name) {
  if (name == "human") return Embodiment::human;
  if (name == "robot") return Embodiment::robot;
  throw ValidationError("unknown embodiment: " + name);
}

std::string color_name(int color_id) {
  if (color_id < 0 || color_id >= kNumColors) throw ValidationError("color id out of range");
  return kColorWords[color_id];
}

std::string Scene::instruction() const {
  const SceneObject& t = target();
  return "place the " + color_name(t.color_id) + " " + synthgym::to_string(t.shape) +
         " on the plate";
}

Scene generate_scene(uint64_t seed, Regime regime, const SceneDistribution& dist) {
  Scene scene;
  scene.rng_seed = seed;
  scene.regime = regime;

  // Goal plate.
  Rng goal_rng(seed, kGoalStream);
  SceneObject plate;
  plate.shape = Shape::plate;
  plate.color_id = dist.id_colors[static_cast<size_t>(
      goal_rng.uniform_int(0, static_cast<int64_t>(dist.id_colors.size()) - 1))];
  plate.position = draw_in_region(goal_rng, dist.goal_region);
  scene.objects.push_back(plate);
  scene.goal_index = 0;

  // Target identity.
  Rng obj_rng(seed, kObjectStream);
  SceneObject target;
  if (regime == Regime::OOD_object) {
    target.shape = dist.ood_shapes[static_cast<size_t>(
        obj_rng.uniform_int(0, static_cast<int64_t>(dist.ood_shapes.size()) - 1))];
    target.color_id = dist.ood_colors[static_cast<size_t>(
        obj_rng.uniform_int(0, static_cast<int64_t>(dist.ood_colors.size()) - 1))];
  } else {
    target.shape = dist.id_shapes[static_cast<size_t>(
        obj_rng.uniform_int(0, static_cast<int64_t>(dist.id_shapes.size()) - 1))];
    target.color_id = dist.id_colors[static_cast<size_t>(
        obj_rng.uniform_int(0, static_cast<int64_t>(dist.id_colors.size()) - 1))];
  }

  // Target position.
  Rng pos_rng(seed, kPositionStream);
  const Eigen::Vector4d& region =
      regime == Regime::OOD_position ? dist.ood_target_region : dist.id_target_region;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 200) throw NumericalError("generate_scene: target placement failed");
    target.position = draw_in_region(pos_rng, region);
    if (far_enough(target.position, scene)) break;
  }
  scene.objects.push_back(target);
  scene.target_index = 1;

  // Background.
  Rng bg_rng(seed, kBackgroundStream);
  const auto& bgs =
      regime == Regime::OOD_scene ? dist.ood_backgrounds : dist.id_backgrounds;
  scene.background_id =
      bgs[static_cast<size_t>(bg_rng.uniform_int(0, static_cast<int64_t>(bgs.size()) - 1))];

  // Lighting.
  if (regime == Regime::OOD_lighting) {
    Rng light_rng(seed, kLightingStream);
    scene.lighting = light_rng.bernoulli(0.5) ? light_rng.uniform(0.3, 0.7)
                                              : light_rng.uniform(1.3, 1.7);
  } else {
    scene.lighting = 1.0;
  }

  // Distractors; never match the target descriptor (color + shape).
  Rng dis_rng(seed, kDistractorStream);
  const int count = regime == Regime::OOD_distractors
                        ? static_cast<int>(dis_rng.uniform_int(dist.ood_min_distractors,
                                                               dist.ood_max_distractors))
                        : static_cast<int>(dis_rng.uniform_int(0, dist.id_max_distractors));
  for (int d = 0; d < count; ++d) {
    SceneObject obj;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 500) throw NumericalError("generate_scene: distractor placement failed");
      obj.shape = dist.id_shapes[static_cast<size_t>(
          dis_rng.uniform_int(0, static_cast<int64_t>(dist.id_shapes.size()) - 1))];
      obj.color_id = dist.id_colors[static_cast<size_t>(
          dis_rng.uniform_int(0, static_cast<int64_t>(dist.id_colors.size()) - 1))];
      if (obj.shape == target.shape && obj.color_id == target.color_id) continue;
      obj.position = {dis_rng.uniform(0.08, 0.92), dis_rng.uniform(0.08, 0.92)};
      if (far_enough(obj.position, scene)) break;
    }
    scene.objects.push_back(obj);
  }
  return scene;
}

Image render(const Scene& scene, const std::optional<Eigen::Vector2d>& agent_pose,
             const EnvConfig& cfg) {
  const int res = cfg.resolution;
  Image img(res, res);
  const Rgb bg = kBackgrounds[scene.background_id % 8];
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const double tx = (x + 0.5) / res;
      const double ty = (y + 0.5) / res;
      Rgb px = bg;
      for (const SceneObject& obj : scene.objects) {
        const double dx = tx - obj.position.x();
        const double dy = ty - obj.position.y();
        if (!in_shape(obj.shape, dx, dy)) continue;
        Rgb c = kColors[obj.color_id % kNumColors];
        if (obj.shape == Shape::plate) {
          // pastel fill with a darker rim
          const double r2 = dx * dx + dy * dy;
          const float mixw = r2 > 0.095 * 0.095 ? 0.35f : 0.55f;
          c = {c.r * (1 - mixw) + 0.9f * mixw, c.g * (1 - mixw) + 0.9f * mixw,
               c.b * (1 - mixw) + 0.9f * mixw};
        }
        px = c;
      }
      if (agent_pose) {
        const double dx = tx - agent_pose->x();
        const double dy = ty - agent_pose->y();
        const bool cross = (std::abs(dx) <= 0.008 && std::abs(dy) <= 0.032) ||
                           (std::abs(dy) <= 0.008 && std::abs(dx) <= 0.032);
        if (cross) px = {1.0f, 1.0f, 1.0f};
      }
      img.at(y, x, 0) = std::clamp(px.r * static_cast<float>(scene.lighting), 0.0f, 1.0f);
      img.at(y, x, 1) = std::clamp(px.g * static_cast<float>(scene.lighting), 0.0f, 1.0f);
      img.at(y, x, 2) = std::clamp(px.b * static_cast<float>(scene.lighting), 0.0f, 1.0f);
    }
  }
  return img;
}

Eigen::Vector2d effector_from_action(const Eigen::Matrix<double, kActionDim, 1>& action,
                                     Embodiment embodiment) {
  if (embodiment == Embodiment::robot) return {action[0], action[1]};
  return {action[kWristPosOffset], action[kWristPosOffset + 1]};
}

namespace {

Eigen::Matrix<double, kActionDim, 1> human_action(const Eigen::Vector2d& effector,
                                                  double curl) {
  HandChain left;
  left.wrist.position = {effector.x(), effector.y(), 0.0};
  for (auto& j : left.joint_angles) {
    j[0] = 0.2 + 0.7 * curl;
    j[1] = 0.15 + 0.55 * curl;
  }
  HandState ls;
  ls.fingertips = hand_fk(left);
  ls.wrist_position = left.wrist.position;

  HandChain right;
  right.wrist.position = {0.85, 0.15, 0.0};
  for (auto& j : right.joint_angles) {
    j[0] = 0.3;
    j[1] = 0.2;
  }
  HandState rs;
  rs.fingertips = hand_fk(right);
  rs.wrist_position = right.wrist.position;
  return pack_action(ls, rs);
}

Eigen::Matrix<double, kActionDim, 1> robot_action(const Eigen::Vector2d& effector) {
  Eigen::Matrix<double, kActionDim, 1> a = Eigen::Matrix<double, kActionDim, 1>::Zero();
  a[0] = effector.x();
  a[1] = effector.y();
  a[7] = 0.85;  // parked second arm
  a[8] = 0.15;
  return a;
}

Eigen::Matrix<double, kActionDim, 1> embodiment_action(Embodiment e,
                                                       const Eigen::Vector2d& effector,
                                                       double curl) {
  return e == Embodiment::human ? human_action(effector, curl) : robot_action(effector);
}

/// Straight-line waypoints at max_speed, inclusive of the endpoint.
std::vector<Eigen::Vector2d> path_to(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                                     double max_speed) {
  std::vector<Eigen::Vector2d> out;
  const double dist = (to - from).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(dist / max_speed)));
  for (int i = 1; i <= steps; ++i) out.push_back(from + (to - from) * (static_cast<double>(i) / steps));
  return out;
}

}  // namespace

Demonstration script_demo(const Scene& scene, Embodiment embodiment, int horizon_frames,
                          const EnvConfig& cfg) {
  const Eigen::Vector2d target = scene.target().position;
  const Eigen::Vector2d goal = scene.goal().position;
  if (target.x() < 0 || target.x() > 1 || target.y() < 0 || target.y() > 1)
    throw ValidationError("script_demo: unreachable target");

  Rng rng(scene.rng_seed, Rng::mix(kDemoStream, static_cast<uint64_t>(embodiment)));

  const Eigen::Vector2d start(0.5, 0.08);
  const int dwell0 = cfg.gaze_lead_frames + 2;
  const int grab_dwell = 3;

  // Effector schedule and per-frame grip curl.
  std::vector<Eigen::Vector2d> effector(static_cast<size_t>(dwell0), start);
  std::vector<double> curl(static_cast<size_t>(dwell0), 0.0);
  std::vector<bool> carried(static_cast<size_t>(dwell0), false);
  for (const auto& p : path_to(start, target, cfg.max_speed)) {
    effector.push_back(p);
    curl.push_back(0.0);
    carried.push_back(false);
  }
  const int grab_start = static_cast<int>(effector.size());
  for (int i = 0; i < grab_dwell; ++i) {
    effector.push_back(target);
    curl.push_back((i + 1.0) / grab_dwell);
    carried.push_back(i + 1 == grab_dwell);
  }
  for (const auto& p : path_to(target, goal, cfg.max_speed)) {
    effector.push_back(p);
    curl.push_back(1.0);
    carried.push_back(true);
  }
  if (static_cast<int>(effector.size()) > horizon_frames)
    throw ValidationError("script_demo: horizon_frames shorter than the scripted path");
  while (static_cast<int>(effector.size()) < horizon_frames) {
    effector.push_back(goal);
    curl.push_back(1.0);
    carried.push_back(true);
  }
  const int total = horizon_frames;

  // One noisy fixation point per fixation segment; gaze precedes the motion.
  auto clamp01 = [](Eigen::Vector2d p) {
    return Eigen::Vector2d(std::clamp(p.x(), 0.0, 1.0), std::clamp(p.y(), 0.0, 1.0));
  };
  const Eigen::Vector2d fix_target =
      clamp01(target + Eigen::Vector2d(rng.gaussian(0, cfg.gaze_sigma),
                                       rng.gaussian(0, cfg.gaze_sigma)));
  const Eigen::Vector2d fix_goal =
      clamp01(goal + Eigen::Vector2d(rng.gaussian(0, cfg.gaze_sigma),
                                     rng.gaussian(0, cfg.gaze_sigma)));

  Demonstration demo;
  demo.embodiment = embodiment;
  demo.instruction = scene.instruction();
  demo.success = true;
  demo.frames.reserve(static_cast<size_t>(total));

  Scene live = scene;
  for (int t = 0; t < total; ++t) {
    Frame frame;
    if (carried[static_cast<size_t>(t)])
      live.objects[static_cast<size_t>(live.target_index)].position = effector[static_cast<size_t>(t)];
    frame.image = render(live, effector[static_cast<size_t>(t)], cfg);

    if (embodiment == Embodiment::human) {
      const Eigen::Vector2d& fix = t >= grab_start ? fix_goal : fix_target;
      frame.gaze.x = fix.x();
      frame.gaze.y = fix.y();
      frame.gaze.mask = true;
      frame.gaze.confidence = rng.bernoulli(cfg.low_confidence_frac) ? 0.2 : 1.0;
      frame.hand_left = true;
      frame.hand_right = true;
    } else {
      frame.gaze = GazeSample{};  // mask 0, contents ignored
      frame.hand_left = false;
      frame.hand_right = false;
    }

    // State reads the current pose; the action commands the next one.
    const int next = std::min(t + 1, total - 1);
    frame.state = embodiment_action(embodiment, effector[static_cast<size_t>(t)],
                                    curl[static_cast<size_t>(t)]);
    frame.action = embodiment_action(embodiment, effector[static_cast<size_t>(next)],
                                     curl[static_cast<size_t>(next)]);
    demo.frames.push_back(std::move(frame));
  }
  return demo;
}

RolloutResult rollout_env(const PolicyFn& policy, const Scene& scene, int max_steps,
                          Embodiment embodiment, const EnvConfig& cfg) {
  RolloutResult result;
  Scene live = scene;
  Eigen::Vector2d effector(0.5, 0.08);
  bool grabbed = false;
  const Eigen::Vector2d goal = scene.goal().position;

  auto target_pos = [&]() -> Eigen::Vector2d {
    return live.objects[static_cast<size_t>(live.target_index)].position;
  };
  // Success may hold at step 0 (target spawned on the plate is prevented by
  // scene generation, so this only fires for adversarial scenes in tests).
  auto is_success = [&]() { return (target_pos() - goal).norm() < cfg.success_tolerance; };

  while (result.steps_taken < max_steps && !result.success) {
    const Image image = render(live, effector, cfg);
    const Eigen::VectorXd state =
        embodiment_action(embodiment, effector, grabbed ? 1.0 : 0.0);
    Eigen::MatrixXd chunk = policy(image, state, scene.instruction());
    if (chunk.rows() < 1 || chunk.cols() != kActionDim)
      throw ValidationError("rollout_env: policy chunk must be H x 48");
    if (!chunk.allFinite()) {
      result.non_finite_flag = true;
      RolloutStep step;
      step.effector = effector;
      step.target_position = target_pos();
      step.grabbed = grabbed;
      step.non_finite_action = true;
      result.trajectory.push_back(step);
      break;
    }
    const int exec = std::min<int>(cfg.exec_steps, static_cast<int>(chunk.rows()));
    for (int k = 0; k < exec && result.steps_taken < max_steps; ++k) {
      Eigen::Matrix<double, kActionDim, 1> row = chunk.row(k).transpose();
      Eigen::Vector2d cmd = effector_from_action(row, embodiment);
      cmd.x() = std::clamp(cmd.x(), 0.0, 1.0);
      cmd.y() = std::clamp(cmd.y(), 0.0, 1.0);
      Eigen::Vector2d delta = cmd - effector;
      const double norm = delta.norm();
      if (norm > cfg.rate_limit) delta *= cfg.rate_limit / norm;
      effector += delta;
      if (!grabbed && (effector - target_pos()).norm() < cfg.grab_radius) grabbed = true;
      if (grabbed) live.objects[static_cast<size_t>(live.target_index)].position = effector;
      ++result.steps_taken;
      RolloutStep step;
      step.effector = effector;
      step.target_position = target_pos();
      step.grabbed = grabbed;
      result.trajectory.push_back(step);
      if (is_success()) {
        result.success = true;
        break;
      }
    }
  }
  return result;
}

PolicyFn make_oracle_policy(const Scene& scene, Embodiment embodiment, int horizon,
                            const EnvConfig& cfg) {
  // Holds the grab state across calls; drive each instance from one caller.
  auto grabbed = std::make_shared<bool>(false);
  const Eigen::Vector2d target = scene.target().position;
  const Eigen::Vector2d goal = scene.goal().position;
  return [=](const Image&, const Eigen::VectorXd& state, const std::string&) -> Eigen::MatrixXd {
    Eigen::Matrix<double, kActionDim, 1> current = state.head<kActionDim>();
    Eigen::Vector2d effector = effector_from_action(current, embodiment);
    if ((effector - target).norm() < cfg.grab_radius * 0.8) *grabbed = true;
    Eigen::MatrixXd chunk(horizon, kActionDim);
    Eigen::Vector2d pos = effector;
    for (int h = 0; h < horizon; ++h) {
      const Eigen::Vector2d dest = *grabbed ? goal : target;
      Eigen::Vector2d delta = dest - pos;
      const double norm = delta.norm();
      if (norm > cfg.max_speed) delta *= cfg.max_speed / norm;
      pos += delta;
      chunk.row(h) = embodiment_action(embodiment, pos, *grabbed ? 1.0 : 0.0).transpose();
    }
    return chunk;
  };
}

}  // namespace vlia::synthgym
