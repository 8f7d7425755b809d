#include <exception>
#include <iostream>

#include "common.hpp"
#include "spectralens/errors.hpp"
#include "spectralens/parallel.hpp"
#include "spectralens/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectralens: spectral statistics of data Gram matrices against random matrix theory"};
    app.option_defaults()->always_capture_default();
    app.fallthrough();
    app.set_version_flag("--version", spectralens::report::kToolVersion);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: SPECTRALENS_THREADS, then hardware)")
        ->check(CLI::Range(1u, 4096u));
    app.require_subcommand(1);

    std::vector<cli::Command> commands;
    cli::register_commands(app, commands);
    cli::register_figures(app, commands);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (threads > 0) {
        spectralens::set_thread_count(threads);
    }

    for (const auto& cmd : commands) {
        if (!cmd.app->parsed()) {
            continue;
        }
        cli::Run run;
        run.command = cmd.app->get_parent() == &app ? cmd.app->get_name()
                                                    : cmd.app->get_parent()->get_name() + " " + cmd.app->get_name();
        run.config = cli::effective_config(*cmd.app);
        run.config["threads"] = spectralens::thread_count();
        try {
            cmd.run(run);
            run.outputs.flush();
        } catch (const spectralens::InputError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::filesystem::filesystem_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return 2;
        }
        return 0;
    }
    std::cerr << "error: no command selected\n";
    return 1;
}
