#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "nixforge/runtime.hpp"

int main(int argc, char** argv) {
    using namespace nixforge::cli;
    nixforge::tune_allocator();

    CLI::App app{"nixforge: CPU text-to-speech student engine and "
                 "distillation loss workbench"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Synthesize a WAV from text");
    c_synth->add_option("--checkpoint", synth.checkpoint, "Model checkpoint");
    c_synth->add_option("--text", synth.text, "Input text");
    c_synth->add_option("--text-file", synth.text_file, "Input text file");
    c_synth->add_option("--out", synth.out, "Output WAV path");
    c_synth->add_option("--seed", synth.seed, "Latent sampling seed");
    c_synth->add_option("--temperature", synth.temperature, "Sampling temperature");
    c_synth->add_option("--length-scale", synth.length_scale, "Duration scale");
    c_synth->add_option("--threads", synth.threads, "Kernel threads");

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "Measure real-time factor");
    c_bench->add_option("--checkpoint", bench.checkpoint, "Model checkpoint");
    c_bench->add_option("--text", bench.text, "Input text");
    c_bench->add_option("--text-file", bench.text_file, "Input text file");
    c_bench->add_option("--runs", bench.runs, "Timed runs");
    c_bench->add_option("--warmup", bench.warmup, "Discarded warmup runs");
    c_bench->add_option("--threads", bench.threads, "Kernel threads");
    c_bench->add_option("--baseline-rtf", bench.baseline_rtf,
                        "Baseline RTF for the speedup column");

    InspectArgs inspect;
    auto* c_inspect =
        app.add_subcommand("inspect", "Parameter counts and reduction ratios");
    c_inspect->add_option("--checkpoint", inspect.checkpoint, "Model checkpoint");
    c_inspect->add_option("--teacher-params", inspect.teacher_params,
                          "Teacher parameter count for the compression ratio");

    LossesArgs losses;
    auto* c_losses = app.add_subcommand(
        "losses", "Evaluate distillation losses against a teacher dump");
    c_losses->add_option("--teacher-dump", losses.teacher_dump, "Teacher dump");
    c_losses->add_option("--checkpoint", losses.checkpoint, "Model checkpoint");
    c_losses->add_option("--disc-checkpoint", losses.disc_checkpoint,
                         "Discriminator checkpoint (default: seeded init)");
    c_losses->add_option("--disc-seed", losses.disc_seed,
                         "Discriminator init seed");
    c_losses->add_option("--seed-a", losses.seed_a, "First decode seed");
    c_losses->add_option("--seed-b", losses.seed_b, "Second decode seed");

    GradcheckArgs gradcheck;
    auto* c_gradcheck = app.add_subcommand(
        "gradcheck", "Analytic KL gradient vs finite differences");
    c_gradcheck->add_option("--seed", gradcheck.seed, "RNG seed");
    c_gradcheck->add_option("--cells", gradcheck.cells, "Random cells to check");

    AlignArgs align;
    auto* c_align =
        app.add_subcommand("align", "MAS path and alignment losses for a dump");
    c_align->add_option("--teacher-dump", align.teacher_dump, "Teacher dump");
    c_align->add_option("--checkpoint", align.checkpoint, "Model checkpoint");

    InitArgs init;
    auto* c_init =
        app.add_subcommand("init", "Write a seeded default checkpoint");
    c_init->add_option("--out", init.out, "Output checkpoint path");
    c_init->add_option("--seed", init.seed, "Init seed");
    c_init->add_flag("--discriminator", init.discriminator,
                     "Write the discriminator checkpoint instead");

    MakeDumpArgs make_dump;
    auto* c_dump = app.add_subcommand(
        "make-dump", "Write a synthetic teacher feature dump");
    c_dump->add_option("--out", make_dump.out, "Output dump path");
    c_dump->add_option("--seed", make_dump.seed, "Dump seed");
    c_dump->add_option("--tokens", make_dump.tokens, "Token count J");
    c_dump->add_option("--frames", make_dump.frames, "Frame count K");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kBadArgs;
    }

    if (c_synth->parsed()) return cmd_synth(synth, std::cout, std::cerr);
    if (c_bench->parsed()) return cmd_bench(bench, std::cout, std::cerr);
    if (c_inspect->parsed()) return cmd_inspect(inspect, std::cout, std::cerr);
    if (c_losses->parsed()) return cmd_losses(losses, std::cout, std::cerr);
    if (c_gradcheck->parsed()) return cmd_gradcheck(gradcheck, std::cout, std::cerr);
    if (c_align->parsed()) return cmd_align(align, std::cout, std::cerr);
    if (c_init->parsed()) return cmd_init(init, std::cout, std::cerr);
    if (c_dump->parsed()) return cmd_make_dump(make_dump, std::cout, std::cerr);
    return kBadArgs;
}
