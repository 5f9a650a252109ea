#include "dcuprl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dcuprl/serialize.hpp"

namespace dcuprl {

std::string VariantConfig::algorithm_label() const {
    if (name == "depth-cuprl") return "Depth-CUPRL";
    if (name == "curl-depth") return "CURL (Depth)";
    if (name == "curl-pixel") return "CURL (Classic)";
    if (name == "sac-cnn-prio") return "SAC (CNN prio.)";
    return name;
}

std::string VariantConfig::image_label() const {
    return input == InputKind::depth ? "Depth" : "Pixel";
}

VariantConfig variant_preset(const std::string& name) {
    VariantConfig v;
    v.name = name;
    if (name == "depth-cuprl") {
        v.input = InputKind::depth;
        v.contrastive = true;
        v.prioritized = true;
    } else if (name == "curl-depth") {
        v.input = InputKind::depth;
        v.contrastive = true;
        v.prioritized = false;
    } else if (name == "curl-pixel") {
        v.input = InputKind::pixel;
        v.contrastive = true;
        v.prioritized = false;
    } else if (name == "sac-cnn-prio") {
        v.input = InputKind::depth;
        v.contrastive = false;
        v.prioritized = true;
    } else {
        throw ConfigError("unknown variant preset '" + name + "' (valid: depth-cuprl, curl-depth, "
                          "curl-pixel, sac-cnn-prio)");
    }
    return v;
}

const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names = {"depth-cuprl", "curl-depth", "curl-pixel",
                                                   "sac-cnn-prio"};
    return names;
}

CameraConfig TrainConfig::camera() const {
    CameraConfig cam;
    cam.width = render_size;
    cam.height = render_size;
    cam.fov = fov;
    cam.max_range = max_range;
    return cam;
}

EncoderConfig TrainConfig::encoder() const {
    EncoderConfig e;
    e.in_channels = stack;
    e.crop = crop_size;
    e.latent_dim = latent_dim;
    return e;
}

void TrainConfig::validate() const {
    camera().validate();
    sac.validate();
    if (total_steps < 0) throw ConfigError("train: negative total_steps");
    if (episode_cap < 1) throw ConfigError("train: episode_cap must be >= 1");
    if (warmup > static_cast<long>(replay.capacity))
        throw ConfigError("train: warmup exceeds replay capacity");
    if (crop_size > render_size) throw ConfigError("train: crop larger than render");
    if (rl_period < 1 || nce_period < 1) throw ConfigError("train: update periods must be >= 1");
    if (stack != 3) throw ConfigError("train: frame stack is fixed at 3");
    // reward scale and the episode cap pin the evaluation ceiling
    if (episode_cap == 1000 && episode_cap * 0.01 != 10.0)
        throw ConfigError("train: episode cap and navigation reward no longer imply the 10.00 "
                          "evaluation ceiling");
}

FrameStacker::FrameStacker(int stack, int h, int w) : stack_(stack), h_(h), w_(w) {
    frames_.assign(static_cast<std::size_t>(stack), Tensor::zeros({h, w}));
}

void FrameStacker::reset(const Tensor& frame) {
    for (auto& f : frames_) f = frame; // replicate: no fake zero-range frames
}

void FrameStacker::push(const Tensor& frame) {
    for (int i = stack_ - 1; i > 0; --i)
        frames_[static_cast<std::size_t>(i)] = frames_[static_cast<std::size_t>(i - 1)];
    frames_[0] = frame;
}

Tensor FrameStacker::stacked() const {
    Tensor out = Tensor::zeros({stack_, h_, w_});
    const std::size_t plane = static_cast<std::size_t>(h_) * w_;
    for (int i = 0; i < stack_; ++i)
        std::copy(frames_[static_cast<std::size_t>(i)].data.begin(),
                  frames_[static_cast<std::size_t>(i)].data.end(),
                  out.data.begin() + static_cast<long>(i * plane));
    return out;
}

Agent Agent::make(const TrainConfig& cfg, Rng& rng) {
    Agent a;
    a.ecfg = cfg.encoder();
    a.scfg = cfg.sac;
    a.ccfg = cfg.curl;
    a.enc_q = make_encoder(a.ecfg, rng);
    a.enc_k = make_encoder(a.ecfg, rng);
    a.enc_k.copy_values_from(a.enc_q); // key starts as an exact copy
    a.actor = make_actor(a.scfg, a.ecfg.latent_dim, rng);
    a.critic1 = make_critic(a.scfg, a.ecfg.latent_dim, rng);
    a.critic2 = make_critic(a.scfg, a.ecfg.latent_dim, rng);
    a.target1 = make_critic(a.scfg, a.ecfg.latent_dim, rng);
    a.target2 = make_critic(a.scfg, a.ecfg.latent_dim, rng);
    a.target1.copy_values_from(a.critic1);
    a.target2.copy_values_from(a.critic2);
    if (cfg.curl.bilinear) {
        ParamSet w;
        Tensor& wt = w.add("w", {a.ecfg.latent_dim, a.ecfg.latent_dim});
        for (int i = 0; i < a.ecfg.latent_dim; ++i)
            wt.data[static_cast<std::size_t>(i) * a.ecfg.latent_dim + i] = 1.0f;
        a.curl_w = std::move(w);
    }
    if (cfg.sac.auto_alpha) a.alpha_state.emplace(cfg.sac.alpha, cfg.sac.action_dim);
    return a;
}

float Agent::alpha() const { return alpha_state ? alpha_state->value() : scfg.alpha; }

namespace {

void collect(std::map<std::string, const Tensor*>& out, const ParamSet& ps,
             const std::string& prefix) {
    for (const auto& name : ps.names()) out.emplace(prefix + name, &ps.param(name));
}

void restore(ParamSet& ps, const std::map<std::string, Tensor>& m, const std::string& prefix,
             const std::string& path) {
    for (const auto& name : ps.names()) {
        auto it = m.find(prefix + name);
        if (it == m.end())
            throw ConfigError("parameter file " + path + " is missing '" + prefix + name + "'");
        Tensor& dst = ps.param(name);
        if (it->second.shape != dst.shape)
            throw ConfigError("parameter '" + prefix + name + "' in " + path + " has shape " +
                              shape_str(it->second.shape) + ", expected " + shape_str(dst.shape));
        dst.data = it->second.data;
    }
}

} // namespace

void Agent::save(const std::string& path) const {
    std::map<std::string, const Tensor*> out;
    collect(out, enc_q, "enc_q/");
    collect(out, enc_k, "enc_k/");
    collect(out, actor, "actor/");
    collect(out, critic1, "critic1/");
    collect(out, critic2, "critic2/");
    collect(out, target1, "target1/");
    collect(out, target2, "target2/");
    if (curl_w) collect(out, *curl_w, "curl_w/");
    if (alpha_state) collect(out, alpha_state->log_alpha, "alpha/");
    save_tensor_map(path, out);
}

void Agent::load(const std::string& path) {
    const auto m = load_tensor_map(path);
    restore(enc_q, m, "enc_q/", path);
    restore(enc_k, m, "enc_k/", path);
    restore(actor, m, "actor/", path);
    restore(critic1, m, "critic1/", path);
    restore(critic2, m, "critic2/", path);
    restore(target1, m, "target1/", path);
    restore(target2, m, "target2/", path);
    if (curl_w) restore(*curl_w, m, "curl_w/", path);
    if (alpha_state) restore(alpha_state->log_alpha, m, "alpha/", path);
}

std::string format_rate(double percent) {
    char buf[32];
    if (std::abs(percent - std::round(percent)) < 1e-9)
        std::snprintf(buf, sizeof buf, "%d%%", static_cast<int>(std::llround(percent)));
    else
        std::snprintf(buf, sizeof buf, "%.1f%%", percent);
    return buf;
}

std::string format_table(const std::vector<SuccessRow>& rows) {
    const std::vector<std::string> headers = {"Algorithm", "Image", "Success", "Crash",
                                              "Success Rate (%)"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({r.algorithm, r.image, std::to_string(r.success), std::to_string(r.crash),
                         format_rate(r.rate)});
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << " | ";
            out << row[c] << std::string(width[c] - row[c].size(), ' ');
        }
        out << "\n";
    };
    emit(headers);
    for (const auto& row : cells) emit(row);
    return out.str();
}

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Tensor frame_from(const Sim& sim, InputKind kind, double noise_sigma, double max_range, Rng& rng) {
    const int h = sim.camera().height, w = sim.camera().width;
    Tensor frame = Tensor::zeros({h, w});
    if (kind == InputKind::depth) {
        if (noise_sigma > 0.0) {
            const DepthImage noisy = depth_noise(sim.depth_frame(), noise_sigma, rng);
            for (std::size_t i = 0; i < noisy.data.size(); ++i)
                frame.data[i] = noisy.data[i] / static_cast<float>(max_range);
        } else {
            const DepthImage& d = sim.depth_frame();
            for (std::size_t i = 0; i < d.data.size(); ++i)
                frame.data[i] = d.data[i] / static_cast<float>(max_range);
        }
    } else {
        const PixelImage px = sim.pixel_frame();
        for (std::size_t i = 0; i < px.data.size(); ++i)
            frame.data[i] = static_cast<float>(px.data[i]) / 255.0f;
    }
    return frame;
}

} // namespace

Trainer::Trainer(TrainConfig cfg, VariantConfig variant)
    : cfg_((cfg.validate(), std::move(cfg))),
      variant_(std::move(variant)),
      arena_(Arena::load(cfg_.arena_path)),
      sim_(arena_, cfg_.camera(), cfg_.dt),
      agent_([&] {
          Rng init = Rng::substream(cfg_.seed, "init");
          return Agent::make(cfg_, init);
      }()),
      buffer_([&] {
          ReplayConfig rc = cfg_.replay;
          rc.uniform = !variant_.prioritized;
          return PrioritizedBuffer(rc, {cfg_.stack, cfg_.render_size, cfg_.render_size});
      }()),
      stacker_(cfg_.stack, cfg_.render_size, cfg_.render_size),
      env_rng_(Rng::substream(cfg_.seed, "env")),
      actor_rng_(Rng::substream(cfg_.seed, "actor")),
      update_rng_(Rng::substream(cfg_.seed, "update")),
      replay_rng_(Rng::substream(cfg_.seed, "replay")),
      augment_rng_(Rng::substream(cfg_.seed, "augment")) {}

Tensor Trainer::observe() {
    return frame_from(sim_, variant_.input, cfg_.depth_noise_sigma, cfg_.max_range, env_rng_);
}

Tensor Trainer::policy_action(const Tensor& stack) {
    if (global_step_ < cfg_.warmup) {
        Tensor a = Tensor::zeros({1, 2});
        a.data[0] = static_cast<float>(actor_rng_.uniform(-1.0, 1.0));
        a.data[1] = static_cast<float>(actor_rng_.uniform(-1.0, 1.0));
        return a;
    }
    Tensor obs = center_crop(stack, cfg_.crop_size, cfg_.crop_size);
    obs.shape = {1, cfg_.stack, cfg_.crop_size, cfg_.crop_size};
    const Tensor latent = encode_nograd(agent_.enc_q, obs, agent_.ecfg);
    return act(agent_.actor, latent, /*deterministic=*/false, actor_rng_);
}

void Trainer::check_finite(float loss, const char* what, const ReplayBatch& batch) const {
    if (std::isfinite(loss)) return;
    double rmean = 0.0;
    for (float r : batch.rewards) rmean += r;
    rmean /= static_cast<double>(batch.rewards.size());
    std::ostringstream msg;
    msg << what << " loss is not finite at step " << global_step_ << "; batch reward mean " << rmean
        << ", buffer " << buffer_.size() << ", max raw priority " << buffer_.max_raw_priority();
    throw NumericError(msg.str());
}

void Trainer::rl_update(const ReplayBatch& batch) {
    const Tensor s_center = center_crop_batch(batch.s, cfg_.crop_size, cfg_.crop_size);
    const Tensor s2_center = center_crop_batch(batch.s2, cfg_.crop_size, cfg_.crop_size);
    const Tensor latent2 = encode_nograd(agent_.enc_q, s2_center, agent_.ecfg);

    const float alpha = agent_.alpha();
    const auto targets = compute_targets(agent_.actor, agent_.target1, agent_.target2, latent2,
                                         batch.rewards, batch.done, alpha, cfg_.sac.gamma,
                                         update_rng_);
    auto cres = critic_update(agent_.enc_q, agent_.ecfg, agent_.critic1, agent_.critic2, s_center,
                              batch.actions, targets, batch.weights, cfg_.sac);
    check_finite(cres.loss, "critic", batch);

    SacConfig acfg = cfg_.sac;
    acfg.alpha = alpha;
    auto ares = actor_update(agent_.actor, agent_.critic1, agent_.critic2, cres.latents, acfg,
                             update_rng_);
    check_finite(ares.loss, "actor", batch);
    if (agent_.alpha_state) alpha_update(*agent_.alpha_state, ares.log_probs, cfg_.sac.lr);

    polyak_update(agent_.target1, agent_.critic1, cfg_.sac.tau);
    polyak_update(agent_.target2, agent_.critic2, cfg_.sac.tau);

    if (variant_.prioritized) buffer_.update_priorities(batch.handles, cres.td_errors);

    metrics_.critic_updates += 1;
    metrics_.actor_updates += 1;
    metrics_.polyak_updates += 1;
    critic_loss_acc_ += cres.loss;
    critic_loss_n_ += 1;
    actor_loss_acc_ += ares.loss;
    actor_loss_n_ += 1;
}

void Trainer::nce_update(const ReplayBatch& batch) {
    const Tensor q_crops = random_crop_batch(batch.s, cfg_.crop_size, cfg_.crop_size, augment_rng_);
    const Tensor k_crops = random_crop_batch(batch.s, cfg_.crop_size, cfg_.crop_size, augment_rng_);

    agent_.enc_q.zero_grads();
    if (agent_.curl_w) agent_.curl_w->zero_grads();
    Tape t;
    Var q = encode(t, agent_.enc_q, t.constant(q_crops), agent_.ecfg, true);
    const Tensor k = encode_nograd(agent_.enc_k, k_crops, agent_.ecfg);
    Var loss = agent_.curl_w
                   ? info_nce_bilinear(t, q, t.param(agent_.curl_w->param("w")), t.constant(k))
                   : info_nce(t, q, t.constant(k));
    t.backward(loss);
    adam_step(agent_.enc_q, cfg_.sac.lr);
    if (agent_.curl_w) adam_step(*agent_.curl_w, cfg_.sac.lr);
    momentum_update(agent_.enc_k, agent_.enc_q, cfg_.curl.momentum);

    const float lv = t.value(loss).data[0];
    check_finite(lv, "contrastive", batch);
    metrics_.nce_updates += 1;
    nce_loss_acc_ += lv;
    nce_loss_n_ += 1;
}

void Trainer::update_step() {
    if (global_step_ <= cfg_.warmup) return;
    const long post = global_step_ - cfg_.warmup;
    const bool rl_due = post % cfg_.rl_period == 0;
    const bool nce_due = variant_.contrastive && post % cfg_.nce_period == 0;
    if (!rl_due && !nce_due) return;

    if (variant_.prioritized) {
        const double frac =
            std::min(1.0, static_cast<double>(global_step_) / static_cast<double>(cfg_.total_steps));
        buffer_.set_beta(cfg_.replay.beta + (1.0 - cfg_.replay.beta) * frac);
    }
    ReplayBatch batch = buffer_.sample(cfg_.sac.batch, replay_rng_);
    if (rl_due) rl_update(batch);
    if (nce_due) nce_update(batch);
}

RunMetrics Trainer::run() {
    namespace fs = std::filesystem;
    std::ofstream csv;
    if (!cfg_.out_dir.empty()) {
        fs::create_directories(cfg_.out_dir);
        csv.open(cfg_.out_dir + "/metrics.csv", std::ios::trunc);
        if (!csv) throw ConfigError("cannot write metrics.csv under " + cfg_.out_dir);
        csv << "step,episode,episode_return,eval_mean_return,critic_loss,actor_loss,nce_loss,"
               "buffer_size\n";
    }
    auto checkpoint = [&] {
        if (!cfg_.out_dir.empty()) agent_.save(cfg_.out_dir + "/params.dcpl");
    };
    auto flush_losses = [&](std::ostream& out) {
        out << (critic_loss_n_ ? fmt_g(critic_loss_acc_ / critic_loss_n_) : "") << ","
            << (actor_loss_n_ ? fmt_g(actor_loss_acc_ / actor_loss_n_) : "") << ","
            << (nce_loss_n_ ? fmt_g(nce_loss_acc_ / nce_loss_n_) : "");
        critic_loss_acc_ = actor_loss_acc_ = nce_loss_acc_ = 0.0;
        critic_loss_n_ = actor_loss_n_ = nce_loss_n_ = 0;
    };

    checkpoint(); // initial parameters, even for zero-step runs
    const auto t0 = std::chrono::steady_clock::now();
    long next_eval = cfg_.eval_period;
    std::uint64_t eval_tag = 0;
    long episode = 0;

    while (global_step_ < cfg_.total_steps) {
        sim_.reset(env_rng_);
        stacker_.reset(observe());
        ++episode;
        long nav_steps = 0;
        bool collided = false;

        for (int t = 0; t < cfg_.episode_cap && global_step_ < cfg_.total_steps; ++t) {
            const Tensor s_stack = stacker_.stacked();
            const Tensor a = policy_action(s_stack);
            const StepOutcome out = sim_.step(scale_action(a.data[0], a.data[1]));
            stacker_.push(observe());

            Transition tr;
            tr.s = s_stack;
            tr.s2 = stacker_.stacked();
            tr.a0 = a.data[0];
            tr.a1 = a.data[1];
            tr.r = out.reward;
            tr.done = out.done;
            buffer_.push(tr);

            ++global_step_;
            if (out.done) {
                collided = true;
            } else {
                ++nav_steps;
            }
            update_step();
            if (out.done) break;
        }

        const double ep_return = 0.01 * static_cast<double>(nav_steps) - (collided ? 1.0 : 0.0);
        metrics_.episode_returns.push_back(ep_return);
        metrics_.episode_end_steps.push_back(global_step_);
        metrics_.episodes = episode;
        if (csv.is_open()) {
            csv << global_step_ << "," << episode << "," << fmt_g(ep_return) << ",,";
            flush_losses(csv);
            csv << "," << buffer_.size() << "\n";
            csv.flush();
        }

        // eval between episodes at the nearest period boundary
        if (global_step_ >= next_eval) {
            const EvalResult ev = evaluate(cfg_.eval_episodes, ++eval_tag);
            metrics_.eval_mean_returns.push_back(ev.mean_return);
            if (csv.is_open()) {
                csv << global_step_ << "," << episode << ",," << fmt_g(ev.mean_return) << ",,,,"
                    << buffer_.size() << "\n";
                csv.flush();
            }
            checkpoint();
            while (next_eval <= global_step_) next_eval += cfg_.eval_period;
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    metrics_.env_steps = global_step_;
    metrics_.steps_per_sec = secs > 0.0 ? static_cast<double>(global_step_) / secs : 0.0;
    checkpoint();
    return metrics_;
}

namespace {

struct EvalLane {
    Sim sim;
    FrameStacker stacker;
    Rng noise;
    long nav_steps = 0;
    bool collided = false;
    bool active = true;
    EvalLane(const Arena& a, const CameraConfig& cam, double dt, int stack, int size, Rng noise_rng)
        : sim(a, cam, dt), stacker(stack, size, size), noise(noise_rng) {}
};

} // namespace

EvalResult evaluate_policy(const Agent& agent, const Arena& arena, const TrainConfig& cfg,
                           const VariantConfig& variant, int episodes, std::uint64_t seed,
                           std::uint64_t eval_tag) {
    // Episodes advance in lockstep so the encoder and actor run one
    // batched pass per tick instead of one pass per episode.
    std::vector<EvalLane> lanes;
    lanes.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        const std::uint64_t lane_key = eval_tag * 1000003ull + static_cast<std::uint64_t>(e);
        lanes.emplace_back(arena, cfg.camera(), cfg.dt, cfg.stack, cfg.render_size,
                           Rng::substream(seed, "eval-noise", lane_key));
        Rng rng = Rng::substream(seed, "eval", lane_key);
        lanes.back().sim.reset(rng);
        lanes.back().stacker.reset(frame_from(lanes.back().sim, variant.input,
                                              cfg.depth_noise_sigma, cfg.max_range,
                                              lanes.back().noise));
    }

    Rng unused(0);
    for (int t = 0; t < cfg.episode_cap; ++t) {
        std::vector<int> active;
        for (int e = 0; e < episodes; ++e)
            if (lanes[static_cast<std::size_t>(e)].active) active.push_back(e);
        if (active.empty()) break;

        const int n = static_cast<int>(active.size());
        Tensor obs = Tensor::zeros({n, cfg.stack, cfg.crop_size, cfg.crop_size});
        const std::size_t item = static_cast<std::size_t>(cfg.stack) * cfg.crop_size * cfg.crop_size;
        for (int i = 0; i < n; ++i) {
            const Tensor crop = center_crop(lanes[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])]
                                                .stacker.stacked(),
                                            cfg.crop_size, cfg.crop_size);
            std::copy(crop.data.begin(), crop.data.end(),
                      obs.data.begin() + static_cast<long>(static_cast<std::size_t>(i) * item));
        }
        const Tensor latents = encode_nograd(agent.enc_q, obs, agent.ecfg);
        const Tensor actions = act(agent.actor, latents, /*deterministic=*/true, unused);

        for (int i = 0; i < n; ++i) {
            EvalLane& lane = lanes[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])];
            const float a0 = actions.data[static_cast<std::size_t>(i) * 2];
            const float a1 = actions.data[static_cast<std::size_t>(i) * 2 + 1];
            const StepOutcome out = lane.sim.step(scale_action(a0, a1));
            lane.stacker.push(
                frame_from(lane.sim, variant.input, cfg.depth_noise_sigma, cfg.max_range, lane.noise));
            if (out.done) {
                lane.collided = true;
                lane.active = false;
            } else {
                lane.nav_steps += 1;
            }
        }
    }

    EvalResult res;
    res.episodes = episodes;
    double total = 0.0;
    for (const auto& lane : lanes) {
        total += 0.01 * static_cast<double>(lane.nav_steps) - (lane.collided ? 1.0 : 0.0);
        if (!lane.collided) res.successes += 1;
    }
    res.mean_return = episodes > 0 ? total / episodes : 0.0;
    if (res.mean_return > 10.0) throw ContractError("eval mean return exceeds the 10.00 ceiling");
    return res;
}

EvalResult Trainer::evaluate(int episodes, std::uint64_t eval_tag) {
    return evaluate_policy(agent_, arena_, cfg_, variant_, episodes, cfg_.seed, eval_tag);
}

SuccessRow Trainer::final_eval() {
    const EvalResult ev = evaluate(cfg_.final_episodes, 0xF17AFull);
    SuccessRow row;
    row.algorithm = variant_.algorithm_label();
    row.image = variant_.image_label();
    row.success = ev.successes;
    row.crash = ev.episodes - ev.successes;
    row.rate = ev.episodes > 0 ? 100.0 * ev.successes / ev.episodes : 0.0;
    return row;
}

Transition Trainer::stored_transition(std::size_t slot) const {
    return buffer_.transition_at(slot);
}

CompareResult compare(const std::vector<std::string>& variants,
                      const std::vector<std::uint64_t>& seeds, const TrainConfig& base) {
    CompareResult result;
    for (const auto& vname : variants) {
        for (std::uint64_t seed : seeds) {
            CompareEntry entry;
            entry.variant = vname;
            entry.seed = seed;
            try {
                TrainConfig cfg = base;
                cfg.seed = seed;
                if (!base.out_dir.empty())
                    cfg.out_dir = base.out_dir + "/" + vname + "-s" + std::to_string(seed);
                Trainer trainer(cfg, variant_preset(vname));
                trainer.run();
                entry.row = trainer.final_eval();
            } catch (const std::exception& e) {
                entry.error = e.what(); // siblings keep running
            }
            result.entries.push_back(std::move(entry));
        }
    }

    // fixed presentation order, full method last
    const std::vector<std::string> order = {"curl-depth", "curl-pixel", "sac-cnn-prio",
                                            "depth-cuprl"};
    for (const auto& vname : order) {
        if (std::find(variants.begin(), variants.end(), vname) == variants.end()) continue;
        SuccessRow avg;
        int runs = 0;
        for (const auto& e : result.entries) {
            if (e.variant != vname || !e.error.empty()) continue;
            if (runs == 0) {
                avg.algorithm = e.row.algorithm;
                avg.image = e.row.image;
            }
            avg.success += e.row.success;
            avg.crash += e.row.crash;
            ++runs;
        }
        if (runs == 0) continue;
        const int total = avg.success + avg.crash;
        avg.rate = total > 0 ? 100.0 * avg.success / total : 0.0;
        result.averaged.push_back(avg);
    }
    result.table = format_table(result.averaged);
    return result;
}

} // namespace dcuprl
