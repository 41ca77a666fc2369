#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "nixforge/alignment.hpp"
#include "nixforge/checkpoint.hpp"
#include "nixforge/decoder.hpp"
#include "nixforge/discriminator.hpp"
#include "nixforge/dsp.hpp"
#include "nixforge/encoder.hpp"
#include "nixforge/error.hpp"
#include "nixforge/losses.hpp"
#include "nixforge/manifest.hpp"
#include "nixforge/model_config.hpp"
#include "nixforge/rng.hpp"
#include "nixforge/runtime.hpp"
#include "nixforge/teacher_dump.hpp"
#include "nixforge/wav.hpp"

namespace nixforge::cli {

namespace {

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("NIX_FORGE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

struct LoadedModel {
    Checkpoint ckpt;
    ModelConfig cfg;
};

LoadedModel load_model(const std::string& path) {
    LoadedModel m;
    m.ckpt = load_checkpoint(path);
    m.cfg = ModelConfig::from_config_text(m.ckpt.config_text());
    m.cfg.validate();
    return m;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

// --text wins over --text-file; exactly one must be provided.
bool read_text(const std::string& text, const std::string& text_file,
               std::string& out, std::ostream& err) {
    if (!text.empty()) {
        out = text;
        return true;
    }
    if (text_file.empty()) {
        err << "error: provide --text or --text-file\n";
        return false;
    }
    std::ifstream f(text_file);
    if (!f) {
        err << "error: cannot read text file '" << text_file << "'\n";
        return false;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    out = buf.str();
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r'))
        out.pop_back();
    if (out.empty()) {
        err << "error: text file '" << text_file << "' is empty\n";
        return false;
    }
    return true;
}

struct SynthResult {
    Tensor wave;
    int frames = 0;
};

SynthResult run_synthesis(const StudentEncoder& encoder,
                          const StudentDecoder& decoder,
                          const std::string& text, uint64_t seed,
                          double temperature, double length_scale) {
    TokenSequence tokens =
        tokenize(text, encoder.config().encoder.symbols);
    StudentEncoder::InferResult inferred = encoder.infer(tokens, length_scale);
    Tensor z = sample_latent(inferred.params, seed, temperature);
    SynthResult r;
    r.wave = decoder.decode(z);
    r.frames = inferred.durations.total_frames();
    return r;
}

// Shared alignment/latent forward pass of the training path.
struct TrainingForward {
    SoftAlignment soft;
    HardAlignment hard;
    Durations durations;
    GaussianParams student;
};

TrainingForward training_forward(const StudentEncoder& encoder,
                                 const TeacherDump& dump) {
    TokenSequence tokens{dump.tokens};
    Tensor c_hidden = encoder.encode_text(tokens);
    auto [c_enc, x_enc] = encoder.aligner_encode(c_hidden, dump.x_s);

    TrainingForward fwd{soft_alignment(c_enc, x_enc), {}, {}, {}};
    fwd.hard = mas(fwd.soft);
    fwd.durations = durations_from_hard(fwd.hard);

    // transpose [hidden x J] -> rows-per-token for expansion, back after
    Tensor rows({c_hidden.dim(1), c_hidden.dim(0)});
    for (int i = 0; i < c_hidden.dim(0); ++i)
        for (int j = 0; j < c_hidden.dim(1); ++j) rows(j, i) = c_hidden(i, j);
    Tensor expanded = expand_by_durations(rows, fwd.durations);
    Tensor c_aligned({expanded.dim(1), expanded.dim(0)});
    for (int i = 0; i < expanded.dim(0); ++i)
        for (int j = 0; j < expanded.dim(1); ++j)
            c_aligned(j, i) = expanded(i, j);

    fwd.student = encoder.encode_latent(c_aligned);
    return fwd;
}

} // namespace

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    if (args.checkpoint.empty()) {
        err << "error: --checkpoint is required\n";
        return kBadArgs;
    }
    std::string text;
    if (!read_text(args.text, args.text_file, text, err)) return kBadArgs;
    set_num_threads(resolve_threads(args.threads));

    LoadedModel model;
    try {
        model = load_model(args.checkpoint);
    } catch (const Error& e) {
        err << "error: invalid checkpoint: " << e.what() << "\n";
        return kBadCheckpoint;
    }

    try {
        StudentEncoder encoder(model.cfg, model.ckpt);
        StudentDecoder decoder(model.cfg, model.ckpt);
        SynthResult r = run_synthesis(encoder, decoder, text, args.seed,
                                      args.temperature, args.length_scale);
        write_wav(args.out, r.wave, model.cfg.spectrogram.sample_rate);
        double seconds = static_cast<double>(r.wave.dim(1)) /
                         model.cfg.spectrogram.sample_rate;
        out << "frames=" << r.frames << "\n";
        out << "samples=" << r.wave.dim(1) << "\n";
        out << "audio_seconds=" << fmt(seconds) << "\n";
        out << "out=" << args.out << "\n";
        return kOk;
    } catch (const std::exception& e) {
        err << "error: synthesis failed: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
    if (args.checkpoint.empty()) {
        err << "error: --checkpoint is required\n";
        return kBadArgs;
    }
    if (args.runs < 1) {
        err << "error: --runs must be >= 1\n";
        return kBadArgs;
    }
    std::string text;
    if (!read_text(args.text, args.text_file, text, err)) return kBadArgs;
    int threads = resolve_threads(args.threads);
    set_num_threads(threads);

    LoadedModel model;
    try {
        model = load_model(args.checkpoint);
    } catch (const Error& e) {
        err << "error: invalid checkpoint: " << e.what() << "\n";
        return kBadCheckpoint;
    }

    try {
        StudentEncoder encoder(model.cfg, model.ckpt);
        StudentDecoder decoder(model.cfg, model.ckpt);

        for (int w = 0; w < args.warmup; ++w)
            run_synthesis(encoder, decoder, text, 0, 1.0, 1.0);

        std::vector<double> wall;
        double audio_seconds = 0.0;
        for (int r = 0; r < args.runs; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            SynthResult s = run_synthesis(encoder, decoder, text, 0, 1.0, 1.0);
            auto t1 = std::chrono::steady_clock::now();
            wall.push_back(std::chrono::duration<double>(t1 - t0).count());
            audio_seconds = static_cast<double>(s.wave.dim(1)) /
                            model.cfg.spectrogram.sample_rate;
        }

        std::vector<double> rtf;
        for (double w : wall) rtf.push_back(w / audio_seconds);
        double mean = 0.0;
        for (double v : rtf) mean += v;
        mean /= static_cast<double>(rtf.size());
        double var = 0.0;
        for (double v : rtf) var += (v - mean) * (v - mean);
        double stdev = rtf.size() > 1
                           ? std::sqrt(var / static_cast<double>(rtf.size() - 1))
                           : 0.0;

        err << "runs " << args.runs << " (warmup " << args.warmup
            << "), threads " << threads << "\n";
        err << "audio length  " << std::fixed << std::setprecision(3)
            << audio_seconds << " s\n";
        err << "rtf mean/std  " << std::setprecision(4) << mean << " / "
            << stdev << "\n";
        if (args.baseline_rtf > 0.0)
            err << "speedup       " << std::setprecision(3)
                << args.baseline_rtf / mean << "x vs baseline rtf "
                << args.baseline_rtf << "\n";

        out << "runs=" << args.runs << "\n";
        out << "threads=" << threads << "\n";
        out << "audio_seconds=" << fmt(audio_seconds) << "\n";
        std::ostringstream ws;
        for (size_t i = 0; i < wall.size(); ++i) {
            if (i) ws << ",";
            ws << fmt(wall[i]);
        }
        out << "wall_seconds=" << ws.str() << "\n";
        out << "rtf_mean=" << fmt(mean) << "\n";
        out << "rtf_std=" << fmt(stdev) << "\n";
        if (args.baseline_rtf > 0.0)
            out << "speedup_ratio=" << fmt(args.baseline_rtf / mean) << "\n";
        return kOk;
    } catch (const std::exception& e) {
        err << "error: benchmark failed: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

int cmd_inspect(const InspectArgs& args, std::ostream& out, std::ostream& err) {
    if (args.checkpoint.empty()) {
        err << "error: --checkpoint is required\n";
        return kBadArgs;
    }
    LoadedModel model;
    try {
        model = load_model(args.checkpoint);
    } catch (const Error& e) {
        err << "error: invalid checkpoint: " << e.what() << "\n";
        return kBadCheckpoint;
    }

    ParamCounts counts = count_parameters(model.ckpt);
    err << std::left << std::setw(20) << "module" << std::right << std::setw(12)
        << "params" << "\n";
    for (const auto& [module, n] : counts.by_module)
        err << std::left << std::setw(20) << module << std::right
            << std::setw(12) << n << "\n";
    err << std::left << std::setw(20) << "total" << std::right << std::setw(12)
        << counts.total << "\n";

    for (const auto& [module, n] : counts.by_module)
        out << "params_" << module << "=" << n << "\n";
    out << "params_total=" << counts.total << "\n";

    if (args.teacher_params > 0.0) {
        double ratio = 1.0 - static_cast<double>(counts.total) /
                                 args.teacher_params;
        err << "compression vs teacher ("
            << static_cast<long long>(args.teacher_params) << "): "
            << std::setprecision(4) << ratio * 100.0 << "%\n";
        out << "compression_ratio=" << fmt(ratio) << "\n";
    }

    ReductionReport dec = count_reduction(
        decoder_manifest(model.cfg.decoder),
        decoder_manifest(vanilla_fullwidth_decoder(model.cfg.decoder)));
    ReductionReport disc = count_reduction(
        discriminator_manifest(model.cfg.discriminator),
        discriminator_manifest(teacher_discriminator(model.cfg.discriminator)));
    err << "decoder reduction vs vanilla full-width: "
        << std::setprecision(4) << dec.ratio * 100.0 << "% (" << dec.params_small
        << " vs " << dec.params_baseline << ")\n";
    err << "discriminator reduction vs teacher widths: "
        << std::setprecision(4) << disc.ratio * 100.0 << "% ("
        << disc.params_small << " vs " << disc.params_baseline << ")\n";
    out << "decoder_params_separable=" << dec.params_small << "\n";
    out << "decoder_params_vanilla=" << dec.params_baseline << "\n";
    out << "decoder_reduction_ratio=" << fmt(dec.ratio) << "\n";
    out << "disc_params_student=" << disc.params_small << "\n";
    out << "disc_params_teacher=" << disc.params_baseline << "\n";
    out << "disc_reduction_ratio=" << fmt(disc.ratio) << "\n";
    return kOk;
}

int cmd_losses(const LossesArgs& args, std::ostream& out, std::ostream& err) {
    if (args.teacher_dump.empty() || args.checkpoint.empty()) {
        err << "error: --teacher-dump and --checkpoint are required\n";
        return kBadArgs;
    }

    LoadedModel model;
    TeacherDump dump;
    try {
        model = load_model(args.checkpoint);
        dump = load_teacher_dump(args.teacher_dump);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kBadCheckpoint;
    }

    try {
        const ModelConfig& cfg = model.cfg;
        if (dump.latent_channels() != cfg.encoder.latent_channels)
            throw InputError(
                "dump latent channels " + std::to_string(dump.latent_channels()) +
                " vs model latent_channels " +
                std::to_string(cfg.encoder.latent_channels));
        for (int id : dump.tokens)
            if (id < 0 || id >= cfg.encoder.vocab_size())
                throw InputError("dump token id " + std::to_string(id) +
                                 " vs model vocab_size " +
                                 std::to_string(cfg.encoder.vocab_size()));
        int bins = cfg.spectrogram.n_fft / 2 + 1;
        if (dump.x_s.dim(0) != bins)
            throw InputError("dump x_s bins " + std::to_string(dump.x_s.dim(0)) +
                             " vs model n_fft/2+1 " + std::to_string(bins));
        int hop = cfg.spectrogram.hop_length;
        if (dump.x_w.dim(1) != hop * dump.frames())
            throw InputError("dump waveform " + std::to_string(dump.x_w.dim(1)) +
                             " samples vs hop_length*K " +
                             std::to_string(hop * dump.frames()));

        StudentEncoder encoder(cfg, model.ckpt);
        StudentDecoder decoder(cfg, model.ckpt);
        Checkpoint disc_ckpt =
            args.disc_checkpoint.empty()
                ? init_discriminator_checkpoint(cfg, args.disc_seed)
                : load_checkpoint(args.disc_checkpoint);
        Discriminator disc(cfg, disc_ckpt);

        TrainingForward fwd = training_forward(encoder, dump);
        GaussianParams teacher{dump.mu_q, dump.sigma_q};
        EncoderLossReport enc = encoder_loss(fwd.soft, fwd.hard, teacher,
                                             fwd.student);

        Tensor z_a = sample_latent(teacher, args.seed_a);
        Tensor z_b = sample_latent(teacher, args.seed_b);
        Tensor wave_a = decoder.decode(z_a);
        Tensor wave_b = decoder.decode(z_b);

        Tensor mel_a = mel_spectrogram(wave_a, cfg.spectrogram);
        Tensor mel_k({dump.x_m.dim(0), dump.frames()});
        for (int m = 0; m < mel_k.dim(0); ++m)
            for (int k = 0; k < dump.frames(); ++k) mel_k(m, k) = mel_a(m, k);

        std::vector<PeriodOutput> real = disc.discriminate(dump.x_w);
        std::vector<PeriodOutput> fake = disc.discriminate(wave_a);
        DecoderLossReport dec = decoder_loss(dump.x_w, wave_a, wave_b, dump.x_m,
                                             mel_k, real, fake);

        out << "forward_sum=" << fmt(enc.l_forward_sum) << "\n";
        out << "bin=" << fmt(enc.l_bin) << "\n";
        out << "kl=" << fmt(enc.l_kl) << "\n";
        out << "encoder_total=" << fmt(enc.total) << "\n";
        out << "adv_disc=" << fmt(dec.l_adv_disc) << "\n";
        out << "adv_gen=" << fmt(dec.l_adv_gen) << "\n";
        out << "fmatch=" << fmt(dec.l_fmatch) << "\n";
        out << "recon=" << fmt(dec.l_recon) << "\n";
        out << "ged=" << fmt(dec.l_ged) << "\n";
        out << "decoder_total=" << fmt(dec.total) << "\n";
        return kOk;
    } catch (const std::exception& e) {
        err << "error: loss evaluation failed: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out,
                  std::ostream& err) {
    if (args.cells < 1) {
        err << "error: --cells must be >= 1\n";
        return kBadArgs;
    }

    SplitMix64 rng(args.seed);
    int n = args.cells;
    GaussianParams teacher{Tensor({1, n}), Tensor({1, n})};
    GaussianParams student{Tensor({1, n}), Tensor({1, n})};
    for (int i = 0; i < n; ++i) {
        teacher.mu(0, i) = static_cast<float>(rng.uniform(-2.0, 2.0));
        teacher.sigma(0, i) = static_cast<float>(rng.uniform(0.2, 2.0));
        student.mu(0, i) = static_cast<float>(rng.uniform(-2.0, 2.0));
        student.sigma(0, i) = static_cast<float>(rng.uniform(0.2, 2.0));
    }

    auto [d_mu, d_sigma] = kl_gaussian_grad(teacher, student);

    double h = 1e-4;
    double worst = 0.0;
    auto fd_check = [&](Tensor& field, const Tensor& analytic) {
        for (int i = 0; i < n; ++i) {
            float saved = field(0, i);
            field(0, i) = static_cast<float>(saved + h);
            double up = kl_gaussian(teacher, student);
            field(0, i) = static_cast<float>(saved - h);
            double down = kl_gaussian(teacher, student);
            double span = static_cast<double>(static_cast<float>(saved + h)) -
                          static_cast<double>(static_cast<float>(saved - h));
            field(0, i) = saved;
            double fd = (up - down) / span;
            double rel = std::fabs(static_cast<double>(analytic(0, i)) - fd) /
                         std::max(std::fabs(fd), 1e-8);
            worst = std::max(worst, rel);
        }
    };
    fd_check(student.mu, d_mu);
    fd_check(student.sigma, d_sigma);

    // Single-cell convex fit: must reach the analytic optimum.
    GaussianParams one{Tensor({1, 1}), Tensor({1, 1})};
    one.mu(0, 0) = 0.5f;
    one.sigma(0, 0) = 1.0f;
    Tensor hidden({1, 1}, {1.0f});
    Tensor weight({2, 1});
    Tensor bias({2});
    std::vector<double> fit =
        fit_kl_demo(one, hidden, weight, bias, 500, 0.1);
    double fit_final = fit.back();

    std::vector<double> demo = fit_kl_demo_default(args.seed, 200, 0.1);
    double drop = 1.0 - demo.back() / demo.front();

    bool ok = worst < 1e-5 && fit_final < 1e-6 && demo.back() < demo.front();
    out << "cells=" << n << "\n";
    out << "max_rel_error=" << fmt(worst) << "\n";
    out << "fit_single_cell_final=" << fmt(fit_final) << "\n";
    out << "fit_default_start=" << fmt(demo.front()) << "\n";
    out << "fit_default_final=" << fmt(demo.back()) << "\n";
    out << "fit_default_drop=" << fmt(drop) << "\n";
    out << "status=" << (ok ? "pass" : "fail") << "\n";
    if (!ok) {
        err << "gradcheck failed: worst relative error " << fmt(worst) << "\n";
        return 1;
    }
    return kOk;
}

int cmd_align(const AlignArgs& args, std::ostream& out, std::ostream& err) {
    if (args.teacher_dump.empty() || args.checkpoint.empty()) {
        err << "error: --teacher-dump and --checkpoint are required\n";
        return kBadArgs;
    }
    LoadedModel model;
    TeacherDump dump;
    try {
        model = load_model(args.checkpoint);
        dump = load_teacher_dump(args.teacher_dump);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kBadCheckpoint;
    }

    try {
        StudentEncoder encoder(model.cfg, model.ckpt);
        TokenSequence tokens{dump.tokens};
        Tensor c_hidden = encoder.encode_text(tokens);
        auto [c_enc, x_enc] = encoder.aligner_encode(c_hidden, dump.x_s);
        SoftAlignment soft = soft_alignment(c_enc, x_enc);
        HardAlignment hard = mas(soft);
        Durations durations = durations_from_hard(hard);

        Tensor log_probs = soft.probs;
        for (auto& v : log_probs.values())
            v = static_cast<float>(std::log(static_cast<double>(v)));
        ForwardSumResult fs = forward_sum_loss(log_probs);
        double bin = binarization_loss(soft, hard);

        std::ostringstream path;
        for (int k = 0; k < hard.frames(); ++k) {
            for (int j = 0; j < hard.tokens(); ++j)
                if (hard.mask(k, j) != 0.0f) {
                    if (k) path << ",";
                    path << j;
                }
        }
        std::ostringstream ds;
        for (size_t j = 0; j < durations.d.size(); ++j) {
            if (j) ds << ",";
            ds << durations.d[j];
        }

        out << "tokens=" << dump.tokens.size() << "\n";
        out << "frames=" << dump.frames() << "\n";
        out << "path=" << path.str() << "\n";
        out << "durations=" << ds.str() << "\n";
        out << "forward_sum=" << fmt(fs.value) << "\n";
        out << "bin=" << fmt(bin) << "\n";
        return kOk;
    } catch (const std::exception& e) {
        err << "error: alignment failed: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

int cmd_init(const InitArgs& args, std::ostream& out, std::ostream& err) {
    if (args.out.empty()) {
        err << "error: --out is required\n";
        return kBadArgs;
    }
    try {
        ModelConfig cfg;
        Checkpoint ckpt = args.discriminator
                              ? init_discriminator_checkpoint(cfg, args.seed)
                              : init_student_checkpoint(cfg, args.seed);
        save_checkpoint(args.out, ckpt);
        ParamCounts counts = count_parameters(ckpt);
        out << "out=" << args.out << "\n";
        out << "seed=" << args.seed << "\n";
        out << "params_total=" << counts.total << "\n";
        return kOk;
    } catch (const std::exception& e) {
        err << "error: init failed: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

int cmd_make_dump(const MakeDumpArgs& args, std::ostream& out,
                  std::ostream& err) {
    if (args.out.empty()) {
        err << "error: --out is required\n";
        return kBadArgs;
    }
    try {
        TeacherDump dump = synth_teacher_dump(args.seed, args.tokens, args.frames);
        save_teacher_dump(args.out, dump);
        out << "out=" << args.out << "\n";
        out << "seed=" << args.seed << "\n";
        out << "tokens=" << args.tokens << "\n";
        out << "frames=" << args.frames << "\n";
        return kOk;
    } catch (const std::exception& e) {
        err << "error: make-dump failed: " << e.what() << "\n";
        return kSynthesisFailure;
    }
}

} // namespace nixforge::cli
