// Command-line front end: train / eval / compare / frames / bench.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dcuprl/config.hpp"
#include "dcuprl/pgm.hpp"

namespace fs = std::filesystem;
using namespace dcuprl;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out;
    std::string preset;
    std::string scale;
    std::string env;
    std::string arena;
    std::string seed;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--preset", args.preset, "variant preset (depth-cuprl|curl-depth|curl-pixel|sac-cnn-prio)");
    cmd->add_option("--scale", args.scale, "desk|paper");
    cmd->add_option("--env", args.env, "env1|env2");
    cmd->add_option("--arena", args.arena, "explicit arena file path");
    cmd->add_option("--seed", args.seed, "master seed (u64)");
    cmd->add_option("--set", args.sets, "extra key=value overrides")->take_all();
}

Config build_config(const CommonArgs& args) {
    Config cfg;
    if (!args.config_path.empty()) cfg.load_file(args.config_path);
    if (!args.preset.empty()) cfg.set_flag("variant.preset", args.preset);
    if (!args.scale.empty()) cfg.set_flag("run.scale", args.scale);
    if (!args.env.empty()) cfg.set_flag("env.id", args.env);
    if (!args.arena.empty()) cfg.set_flag("env.arena", args.arena);
    if (!args.seed.empty()) cfg.set_flag("run.seed", args.seed);
    if (!args.out.empty()) cfg.set_flag("run.out", args.out);
    for (const auto& kv : args.sets) cfg.set_flag_kv(kv);
    cfg.finalize();
    return cfg;
}

std::string default_run_dir(const Config& cfg) {
    return cfg.get("run.out") + "/" + cfg.get("variant.preset") + "-" + cfg.get("env.id") + "-" +
           cfg.get("run.scale") + "-s" + cfg.get("run.seed");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

int cmd_train(const CommonArgs& args, long steps_override) {
    Config cfg = build_config(args);
    TrainConfig tc = cfg.to_train_config();
    if (steps_override >= 0) tc.total_steps = steps_override;
    tc.out_dir = args.out.empty() ? default_run_dir(cfg) : args.out;
    fs::create_directories(tc.out_dir);
    write_text(tc.out_dir + "/resolved.cfg", cfg.resolved_text());
    std::cout << "run dir: " << tc.out_dir << "\n" << cfg.resolved_text();

    Trainer trainer(tc, cfg.to_variant());
    const RunMetrics m = trainer.run();
    std::cout << "episodes=" << m.episodes << " env_steps=" << m.env_steps
              << " critic_updates=" << m.critic_updates << " nce_updates=" << m.nce_updates
              << " steps_per_sec=" << m.steps_per_sec << "\n";
    if (!m.eval_mean_returns.empty())
        std::cout << "last_eval_mean_return=" << m.eval_mean_returns.back() << "\n";
    std::cout << "artifacts: metrics.csv params.dcpl resolved.cfg\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& params_path, int episodes) {
    Config cfg = build_config(args);
    TrainConfig tc = cfg.to_train_config();
    const VariantConfig variant = cfg.to_variant();

    Rng init = Rng::substream(tc.seed, "init");
    Agent agent = Agent::make(tc, init);
    agent.load(params_path);

    const Arena arena = Arena::load(tc.arena_path);
    const EvalResult ev =
        evaluate_policy(agent, arena, tc, variant, episodes, tc.seed, /*eval_tag=*/0xE7A1ull);
    SuccessRow row;
    row.algorithm = variant.algorithm_label();
    row.image = variant.image_label();
    row.success = ev.successes;
    row.crash = ev.episodes - ev.successes;
    row.rate = ev.episodes > 0 ? 100.0 * ev.successes / ev.episodes : 0.0;
    const std::string table = format_table({row});
    std::cout << table << "mean_return=" << ev.mean_return << "\n";
    if (!args.out.empty()) {
        fs::create_directories(args.out);
        write_text(args.out + "/eval.txt", table);
    }
    return 0;
}

int cmd_compare(const CommonArgs& args, std::vector<std::string> variants,
                std::vector<std::uint64_t> seeds) {
    Config cfg = build_config(args);
    TrainConfig tc = cfg.to_train_config();
    if (variants.empty()) variants = variant_names();
    if (seeds.empty()) seeds = {1, 2};
    tc.out_dir = args.out.empty() ? cfg.get("run.out") + "/compare-" + cfg.get("env.id") + "-" +
                                        cfg.get("run.scale")
                                  : args.out;
    fs::create_directories(tc.out_dir);
    write_text(tc.out_dir + "/resolved.cfg", cfg.resolved_text());

    const CompareResult result = compare(variants, seeds, tc);

    std::ostringstream csv;
    csv << "variant,seed,success,crash,success_rate,error\n";
    for (const auto& e : result.entries) {
        csv << e.variant << "," << e.seed << ",";
        if (e.error.empty())
            csv << e.row.success << "," << e.row.crash << "," << e.row.rate << ",";
        else
            csv << ",,," << "\"" << e.error << "\"";
        csv << "\n";
    }
    write_text(tc.out_dir + "/compare.csv", csv.str());
    write_text(tc.out_dir + "/table.txt", result.table);
    std::cout << result.table;
    for (const auto& e : result.entries)
        if (!e.error.empty())
            std::cerr << "variant " << e.variant << " seed " << e.seed << " failed: " << e.error
                      << "\n";
    return 0;
}

int cmd_frames(const CommonArgs& args, int steps, const std::string& params_path) {
    Config cfg = build_config(args);
    TrainConfig tc = cfg.to_train_config();
    const std::string out = args.out.empty() ? "frames" : args.out;
    fs::create_directories(out);

    const Arena arena = Arena::load(tc.arena_path);
    Sim sim(arena, tc.camera(), tc.dt);
    Rng env_rng = Rng::substream(tc.seed, "env");
    sim.reset(env_rng);

    std::optional<Agent> agent;
    std::optional<FrameStacker> stacker;
    if (!params_path.empty()) {
        Rng init = Rng::substream(tc.seed, "init");
        agent.emplace(Agent::make(tc, init));
        agent->load(params_path);
        stacker.emplace(tc.stack, tc.render_size, tc.render_size);
        Tensor frame = Tensor::zeros({tc.render_size, tc.render_size});
        const DepthImage& d = sim.depth_frame();
        for (std::size_t i = 0; i < d.data.size(); ++i)
            frame.data[i] = d.data[i] / static_cast<float>(tc.max_range);
        stacker->reset(frame);
    }

    std::ofstream pose(out + "/pose.csv", std::ios::trunc);
    pose << "step,x,y,yaw,min_depth,reward\n";
    char name[64];
    for (int t = 0; t < steps; ++t) {
        std::snprintf(name, sizeof name, "%s/depth_%04d.pgm", out.c_str(), t);
        write_depth_pgm(name, sim.depth_frame());
        std::snprintf(name, sizeof name, "%s/pixel_%04d.pgm", out.c_str(), t);
        write_pixel_pgm(name, sim.pixel_frame());

        Action act_cmd;
        if (agent) {
            Tensor obs = center_crop(stacker->stacked(), tc.crop_size, tc.crop_size);
            obs.shape = {1, tc.stack, tc.crop_size, tc.crop_size};
            const Tensor latent = encode_nograd(agent->enc_q, obs, agent->ecfg);
            Rng unused(0);
            const Tensor a = act(agent->actor, latent, true, unused);
            act_cmd = scale_action(a.data[0], a.data[1]);
        } else {
            act_cmd = scale_action(0.2, 0.35); // scripted gentle arc
        }
        const StepOutcome outcome = sim.step(act_cmd);
        if (agent) {
            Tensor frame = Tensor::zeros({tc.render_size, tc.render_size});
            const DepthImage& d = sim.depth_frame();
            for (std::size_t i = 0; i < d.data.size(); ++i)
                frame.data[i] = d.data[i] / static_cast<float>(tc.max_range);
            stacker->push(frame);
        }
        pose << t << "," << outcome.next.x << "," << outcome.next.y << "," << outcome.next.yaw
             << "," << outcome.min_depth << "," << outcome.reward << "\n";
        if (outcome.done) {
            sim.reset(env_rng);
            if (agent) {
                Tensor frame = Tensor::zeros({tc.render_size, tc.render_size});
                const DepthImage& d = sim.depth_frame();
                for (std::size_t i = 0; i < d.data.size(); ++i)
                    frame.data[i] = d.data[i] / static_cast<float>(tc.max_range);
                stacker->reset(frame);
            }
        }
    }
    std::cout << "wrote " << steps << " depth + " << steps << " pixel frames and pose.csv to "
              << out << "\n";
    return 0;
}

double bench_env_steps(const TrainConfig& tc, int n) {
    const Arena arena = Arena::load(tc.arena_path);
    Sim sim(arena, tc.camera(), tc.dt);
    Rng rng(1);
    sim.reset(rng);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) {
        const StepOutcome out = sim.step(scale_action(rng.uniform(-1, 1), rng.uniform(-1, 1)));
        if (out.done) sim.reset(rng);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return n / secs;
}

double bench_updates(const TrainConfig& tc, int n) {
    Rng init(2);
    Agent agent = Agent::make(tc, init);
    ReplayConfig rc = tc.replay;
    rc.capacity = 512;
    PrioritizedBuffer buffer(rc, {tc.stack, tc.render_size, tc.render_size});
    Rng fill(3);
    for (int i = 0; i < 256; ++i) {
        Transition t;
        t.s = Tensor::zeros({tc.stack, tc.render_size, tc.render_size});
        t.s2 = Tensor::zeros({tc.stack, tc.render_size, tc.render_size});
        for (auto& v : t.s.data) v = static_cast<float>(fill.uniform());
        for (auto& v : t.s2.data) v = static_cast<float>(fill.uniform());
        t.a0 = static_cast<float>(fill.uniform(-1, 1));
        t.a1 = static_cast<float>(fill.uniform(-1, 1));
        t.r = fill.uniform() < 0.05 ? -1.0f : 0.01f;
        t.done = t.r < 0.0f;
        buffer.push(t);
    }

    Rng replay_rng(4), update_rng(5), augment_rng(6);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i) {
        ReplayBatch batch = buffer.sample(tc.sac.batch, replay_rng);
        const Tensor s_center = center_crop_batch(batch.s, tc.crop_size, tc.crop_size);
        const Tensor s2_center = center_crop_batch(batch.s2, tc.crop_size, tc.crop_size);
        const Tensor latent2 = encode_nograd(agent.enc_q, s2_center, agent.ecfg);
        const auto targets =
            compute_targets(agent.actor, agent.target1, agent.target2, latent2, batch.rewards,
                            batch.done, tc.sac.alpha, tc.sac.gamma, update_rng);
        auto cres = critic_update(agent.enc_q, agent.ecfg, agent.critic1, agent.critic2, s_center,
                                  batch.actions, targets, batch.weights, tc.sac);
        actor_update(agent.actor, agent.critic1, agent.critic2, cres.latents, tc.sac, update_rng);
        polyak_update(agent.target1, agent.critic1, tc.sac.tau);
        polyak_update(agent.target2, agent.critic2, tc.sac.tau);
        buffer.update_priorities(batch.handles, cres.td_errors);

        const Tensor qc = random_crop_batch(batch.s, tc.crop_size, tc.crop_size, augment_rng);
        const Tensor kc = random_crop_batch(batch.s, tc.crop_size, tc.crop_size, augment_rng);
        agent.enc_q.zero_grads();
        Tape t;
        Var q = encode(t, agent.enc_q, t.constant(qc), agent.ecfg, true);
        const Tensor k = encode_nograd(agent.enc_k, kc, agent.ecfg);
        t.backward(info_nce(t, q, t.constant(k)));
        adam_step(agent.enc_q, tc.sac.lr);
        momentum_update(agent.enc_k, agent.enc_q, tc.curl.momentum);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return n / secs;
}

int cmd_bench(const CommonArgs& args) {
    for (const std::string scale : {"desk", "paper"}) {
        CommonArgs a = args;
        a.scale = scale;
        Config cfg = build_config(a);
        TrainConfig tc = cfg.to_train_config();
        std::cout << scale << ".env_steps_per_sec=" << bench_env_steps(tc, 1000) << "\n";
        std::cout << scale << ".updates_per_sec=" << bench_updates(tc, 100) << "\n" << std::flush;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Depth-CUPRL trainer: contrastive depth-image RL for mapless navigation"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, compare_args, frames_args, bench_args;
    long train_steps = -1;
    std::string eval_params, frames_params;
    int eval_episodes = 1000, frames_steps = 10;
    std::vector<std::string> compare_variants;
    std::vector<std::uint64_t> compare_seeds;

    auto* train = app.add_subcommand("train", "train one variant, writing metrics and parameters");
    add_common(train, train_args);
    train->add_option("--steps", train_steps, "override train.total_steps");

    auto* eval = app.add_subcommand("eval", "evaluate a parameter file, print a table row");
    add_common(eval, eval_args);
    eval->add_option("--params", eval_params, "parameter file (.dcpl)")->required();
    eval->add_option("--episodes", eval_episodes, "evaluation episodes");

    auto* cmp = app.add_subcommand("compare", "train all variants under a shared budget and seeds");
    add_common(cmp, compare_args);
    cmp->add_option("--variants", compare_variants, "subset of variants")->take_all();
    cmp->add_option("--seeds", compare_seeds, "seed list")->take_all();

    auto* frames = app.add_subcommand("frames", "dump per-step depth/pixel PGM frames and poses");
    add_common(frames, frames_args);
    frames->add_option("--steps", frames_steps, "number of steps to roll");
    frames->add_option("--params", frames_params, "optional learned policy (.dcpl)");

    auto* bench = app.add_subcommand("bench", "report env-step and update throughput");
    add_common(bench, bench_args);

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(train_args, train_steps);
        if (eval->parsed()) return cmd_eval(eval_args, eval_params, eval_episodes);
        if (cmp->parsed()) return cmd_compare(compare_args, compare_variants, compare_seeds);
        if (frames->parsed()) return cmd_frames(frames_args, frames_steps, frames_params);
        if (bench->parsed()) return cmd_bench(bench_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
