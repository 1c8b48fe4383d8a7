#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "factorcalc/cert_json.hpp"
#include "factorcalc/oracle.hpp"
#include "factorcalc/replay.hpp"
#include "factorcalc/session.hpp"

#ifdef _WIN32
#define FC_ISATTY() false
#else
#include <unistd.h>
#define FC_ISATTY() (isatty(fileno(stdin)) != 0)
#endif

using namespace factorcalc;

namespace {

int run_check(const std::string &suite, int n, std::uint64_t seed) {
    GenConfig cfg;
    cfg.seed = seed;
    std::vector<SuiteReport> reports;
    if (suite == "all" || suite == "fdim") {
        reports.push_back(check_additivity(cfg, n));
    }
    if (suite == "all" || suite == "words") {
        reports.push_back(check_chain_vs_closed_form(cfg, n));
        reports.push_back(check_trade_invariance(cfg, n));
        reports.push_back(check_rescale_laws(cfg, n));
        reports.push_back(check_mode_monotonicity(cfg, n));
        reports.push_back(check_replay(cfg, n));
    }
    bool ok = true;
    for (auto &rep : reports) {
        std::cout << rep.summary() << "\n";
        if (!rep.ok()) {
            ok = false;
            std::string path = "counterexample-" + rep.name + ".fc";
            std::ofstream out(path);
            out << "# seed " << seed << ", suite " << rep.name << "\n";
            for (auto &c : rep.counterexamples) out << c << "\n";
            std::cout << "  counterexamples written to " << path << "\n";
        }
    }
    return ok ? 0 : 1;
}

int run_session(const std::string &script, const std::string &mode, const std::string &json_out,
                bool check) {
    Session s;
    s.assumptions.mode = mode == "collapsed" ? Mode::Collapsed : Mode::Distinct;

    int severity = 0;
    if (!script.empty()) {
        std::ifstream f(script);
        if (!f) {
            std::cerr << "cannot open " << script << "\n";
            return 1;
        }
        auto r = run_script(s, f);
        std::cout << r.output;
        severity = r.severity;
    } else {
        bool tty = FC_ISATTY();
        std::string line;
        while (!s.done) {
            if (tty) std::cout << "fc> " << std::flush;
            if (!std::getline(std::cin, line)) break;
            auto start = line.find_first_not_of(" \t\r");
            if (start == std::string::npos) continue;
            if (line[start] == '#') continue;
            auto r = eval_command(s, line.substr(start));
            if (!r.output.empty()) std::cout << r.output << "\n";
            severity = std::max(severity, r.severity);
        }
    }

    if (!json_out.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (auto &c : s.certs) arr.push_back(cert_to_json(c));
        std::ofstream out(json_out);
        out << arr.dump(2) << "\n";
    }
    if (check) {
        for (std::size_t i = 0; i < s.certs.size(); ++i) {
            std::string why;
            if (!replay_certificate(s.certs[i], s.cert_initials[i], s.assumptions, &why)) {
                std::cerr << "certificate " << i << " does not replay: " << why << "\n";
                return 2;
            }
        }
        std::cout << s.certs.size() << " certificate(s) replayed\n";
    }
    return severity;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"factor-calc: an exact calculator for free products, free scaled products, "
                 "and free trade of tracial factors"};
    app.require_subcommand(0, 1);

    std::string script, mode = "distinct", json_out;
    bool check = false;
    app.add_option("script", script, "script file, one command per line ('#' comments)");
    app.add_option("--mode", mode, "free-group-factor identification mode")
        ->check(CLI::IsMember({"distinct", "collapsed"}));
    app.add_option("--json", json_out, "write session certificates as JSON");
    app.add_flag("--check", check, "replay every certificate before exiting");

    auto *chk = app.add_subcommand("check", "run the randomized oracle suites");
    std::string suite = "all";
    int n = 1000;
    std::uint64_t seed = 1;
    chk->add_option("--suite", suite)->check(CLI::IsMember({"all", "fdim", "words"}));
    chk->add_option("--n", n, "cases per suite");
    chk->add_option("--seed", seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    if (chk->parsed()) return run_check(suite, n, seed);
    return run_session(script, mode, json_out, check);
}
