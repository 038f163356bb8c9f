#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wavezoom/config.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kMissing = 3, kNumerical = 4 };

struct Options {
    std::string config;
    std::string variant;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
};

int run(const std::string& command, const Options& o) {
    wz::RunConfig cfg = wz::load_run_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    std::optional<wz::VariantKind> variant;
    if (!o.variant.empty()) variant = wz::variant_from_string(o.variant);
    if (command == "generate") wz::cmd_generate(cfg, o.jobs, std::cout);
    if (command == "train") wz::cmd_train(cfg, variant, o.jobs, std::cout);
    if (command == "evaluate") wz::cmd_evaluate(cfg, variant, o.jobs, std::cout);
    if (command == "uq") wz::cmd_uq(cfg, variant, o.jobs, std::cout);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavezoom: wave-propagation surrogates with submodel zoom"};
    app.require_subcommand(1, 1);
    Options o;
    const std::pair<const char*, const char*> commands[] = {
        {"generate", "write the train, test and Monte-Carlo datasets"},
        {"train", "train one variant (or every configured variant)"},
        {"evaluate", "test-set error report for the parametric variants"},
        {"uq", "Monte-Carlo report for the generative variants"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "run configuration (JSON)")->required();
        if (std::string(name) != "generate")
            sub->add_option("--variant", o.variant, "one of: " + wz::variant_list());
        sub->add_option("--jobs", o.jobs, "worker threads (default 1)")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "override the base seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const wz::ConfigError& e) {
        std::cerr << "wavezoom " << command << ": configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const wz::MissingPrerequisite& e) {
        std::cerr << "wavezoom " << command << ": missing prerequisite: " << e.what() << "\n";
        return kMissing;
    } catch (const wz::NumericalError& e) {
        std::cerr << "wavezoom " << command << ": numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "wavezoom " << command << ": error: " << e.what() << "\n";
        return kOther;
    }
}
