#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace nixforge::cli {

// Exit codes shared by every subcommand.
constexpr int kOk = 0;
constexpr int kBadArgs = 2;
constexpr int kBadCheckpoint = 3;
constexpr int kSynthesisFailure = 4;

struct SynthArgs {
    std::string checkpoint;
    std::string text;
    std::string text_file;
    std::string out = "out.wav";
    uint64_t seed = 0;
    double temperature = 1.0;
    double length_scale = 1.0;
    int threads = 0; // 0: NIX_FORGE_THREADS env or 1
};

struct BenchArgs {
    std::string checkpoint;
    std::string text;
    std::string text_file;
    int runs = 20;
    int warmup = 3;
    int threads = 0;
    double baseline_rtf = 0.0; // 0: no speedup column
};

struct InspectArgs {
    std::string checkpoint;
    double teacher_params = 0.0; // 0: no compression column
};

struct LossesArgs {
    std::string teacher_dump;
    std::string checkpoint;
    std::string disc_checkpoint; // empty: seeded init
    uint64_t disc_seed = 7;
    uint64_t seed_a = 1001;
    uint64_t seed_b = 1002;
};

struct GradcheckArgs {
    uint64_t seed = 1;
    int cells = 1000;
};

struct AlignArgs {
    std::string teacher_dump;
    std::string checkpoint;
};

struct InitArgs {
    std::string out;
    uint64_t seed = 1;
    bool discriminator = false;
};

struct MakeDumpArgs {
    std::string out;
    uint64_t seed = 1;
    int tokens = 8;
    int frames = 24;
};

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);
int cmd_inspect(const InspectArgs& args, std::ostream& out, std::ostream& err);
int cmd_losses(const LossesArgs& args, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out, std::ostream& err);
int cmd_align(const AlignArgs& args, std::ostream& out, std::ostream& err);
int cmd_init(const InitArgs& args, std::ostream& out, std::ostream& err);
int cmd_make_dump(const MakeDumpArgs& args, std::ostream& out, std::ostream& err);

} // namespace nixforge::cli
