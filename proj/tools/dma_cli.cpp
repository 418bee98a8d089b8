// Command-line front end: solve / gen / verify over the text and JSON
// formats described in the README.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "dma/driver.hpp"
#include "dma/generator.hpp"
#include "dma/reference.hpp"

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitBudget = 2;
constexpr int kExitInputError = 3;
constexpr int kExitInvariantBreach = 4;

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path);
    if (!in) throw dma::InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw dma::InputError("cannot write '" + path + "'");
    out << text;
}

dma::Vec parse_center(const std::string& text) {
    std::vector<dma::Rat> coords;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) coords.push_back(dma::parse_rat(tok));
    if (coords.empty()) throw dma::InputError("empty ball center");
    return dma::Vec(std::move(coords), dma::Orient::Row);
}

nlohmann::json outcome_to_json(const dma::SolveResult& res) {
    nlohmann::json j;
    switch (res.outcome.status) {
        case dma::OutcomeStatus::Feasible:
            j["status"] = "feasible";
            j["witness"] = dma::witness_to_json(res.outcome.witness->x);
            j["margin"] = dma::rat_str(res.outcome.witness->margin);
            break;
        case dma::OutcomeStatus::Infeasible:
            j["status"] = "infeasible";
            j["certificate"] = dma::certificate_to_json(*res.outcome.certificate);
            break;
        case dma::OutcomeStatus::BudgetExhausted:
            j["status"] = "budget_exhausted";
            j["last_valuation_log2"] = res.outcome.lastValuationLog2;
            break;
    }
    j["steps"] = res.outcome.steps;
    j["stats"] = {{"standard_steps", res.stats.standardSteps},
                  {"rounding_fallbacks", res.stats.roundingFallbacks},
                  {"long_edge_accepted", res.stats.longEdgeAccepted},
                  {"long_edge_rejected", res.stats.longEdgeRejected},
                  {"sparsifies", res.stats.sparsifies},
                  {"budget", res.stats.budget}};
    return j;
}

int exit_code(const dma::SolveResult& res) {
    switch (res.outcome.status) {
        case dma::OutcomeStatus::Feasible: return kExitFeasible;
        case dma::OutcomeStatus::Infeasible: return kExitInfeasible;
        case dma::OutcomeStatus::BudgetExhausted: return kExitBudget;
    }
    return kExitInvariantBreach;
}

int run_solve(const std::string& input, const std::string& oracleKind,
              const std::string& center, const std::string& radius, const std::string& mode,
              unsigned sigFactor, unsigned maxStepsFactor, double longEdgeFactor,
              long sOverride, const std::string& tracePath, bool json, bool witnessCenter) {
    dma::SolveConfig cfg;
    cfg.mode = mode == "rounded" ? dma::SolveMode::Rounded : dma::SolveMode::Exact;
    cfg.sigBitsFactor = sigFactor;
    cfg.maxStepsFactor = maxStepsFactor;
    cfg.longEdgeFactor = longEdgeFactor;
    if (sOverride > 0) cfg.sOverride = sOverride;
    cfg.witnessCenter = witnessCenter;

    dma::SolveResult res;
    if (oracleKind == "ball") {
        if (center.empty() || radius.empty())
            throw dma::InputError("ball oracle needs --center and --radius");
        dma::BallOracle oracle(parse_center(center), dma::parse_rat(radius));
        res = dma::solve_with_oracle(oracle, cfg);
    } else {
        if (input.empty()) throw dma::InputError("dense oracle needs --input");
        dma::InequalitySystem sys = dma::parse_system(read_input(input));
        res = dma::solve_system(sys, cfg);
    }

    if (!tracePath.empty()) write_file(tracePath, dma::trace_to_csv(res.trace));

    if (json) {
        std::cout << outcome_to_json(res).dump(2) << '\n';
    } else {
        switch (res.outcome.status) {
            case dma::OutcomeStatus::Feasible: {
                std::cout << "feasible after " << res.outcome.steps << " steps; witness x = (";
                const dma::Vec& x = res.outcome.witness->x;
                for (std::size_t i = 0; i < x.size(); ++i)
                    std::cout << (i ? ", " : "") << dma::rat_str(x[i]);
                std::cout << "), margin " << dma::rat_str(res.outcome.witness->margin) << '\n';
                break;
            }
            case dma::OutcomeStatus::Infeasible: {
                const auto& cert = *res.outcome.certificate;
                std::cout << "infeasible ("
                          << (cert.kind == dma::CertKind::Exact ? "exact" : "approximate")
                          << " certificate, " << cert.entries.size() << " entries) after "
                          << res.outcome.steps << " steps\n";
                break;
            }
            case dma::OutcomeStatus::BudgetExhausted:
                std::cout << "budget exhausted after " << res.outcome.steps
                          << " steps (inconclusive)\n";
                break;
        }
    }
    return exit_code(res);
}

int run_gen(const std::string& kind, std::size_t n, std::size_t m, unsigned bits,
            std::uint64_t seed, const std::string& output, bool json) {
    dma::GeneratedInstance inst = dma::generate(dma::gen_kind_from_string(kind), n, m, bits, seed);
    std::string text = json ? dma::system_to_json(inst.system).dump(2) + "\n"
                            : dma::serialize_system(inst.system);
    if (output.empty() || output == "-")
        std::cout << text;
    else
        write_file(output, text);
    return 0;
}

int run_verify(const std::string& systemPath, const std::string& witnessPath,
               const std::string& certPath, bool reference) {
    dma::InequalitySystem sys = dma::parse_system(read_input(systemPath));
    bool pass = true;

    if (!witnessPath.empty()) {
        dma::Vec x = dma::witness_from_json(nlohmann::json::parse(read_input(witnessPath)));
        dma::WitnessCheck chk = dma::verify_witness(sys, x);
        if (chk.ok)
            std::cout << "witness: PASS (margin " << dma::rat_str(chk.margin) << ")\n";
        else
            std::cout << "witness: FAIL (row " << chk.violatedRow << " violated)\n";
        pass = pass && chk.ok;
    }
    if (!certPath.empty()) {
        dma::InfeasibilityCertificate cert =
            dma::certificate_from_json(nlohmann::json::parse(read_input(certPath)));
        std::optional<dma::BitParams> bp;
        if (cert.kind == dma::CertKind::Approximate) bp = dma::bit_params(sys);
        bool ok = dma::verify_certificate(sys, cert, bp);
        std::cout << "certificate: " << (ok ? "PASS" : "FAIL") << '\n';
        pass = pass && ok;
    }
    if (reference) {
        dma::FMVerdict fm = dma::fm_feasible(sys);
        std::cout << "reference (Fourier-Motzkin): "
                  << (fm.feasible ? "feasible" : "infeasible") << '\n';
    }
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact strict-feasibility solver (Ax > 0) with a climbing dual-matrix core"};
    app.require_subcommand(1);

    // solve
    std::string input, oracleKind = "dense", center, radius, mode = "exact", tracePath;
    unsigned sigFactor = 2, maxStepsFactor = 20;
    double longEdgeFactor = 4.0;
    long sOverride = 0;
    bool json = false, witnessCenter = false;
    auto* solve = app.add_subcommand("solve", "solve a feasibility instance");
    solve->add_option("--input", input, "system file ('-' for stdin)");
    solve->add_option("--oracle", oracleKind, "dense|ball")
        ->check(CLI::IsMember({"dense", "ball"}));
    solve->add_option("--center", center, "ball center, comma-separated exact fractions");
    solve->add_option("--radius", radius, "ball radius, exact fraction");
    solve->add_option("--mode", mode, "exact|rounded")->check(CLI::IsMember({"exact", "rounded"}));
    solve->add_option("--sig-factor", sigFactor, "rounding width multiplier");
    solve->add_option("--max-steps-factor", maxStepsFactor, "step budget = factor*n^3*L");
    solve->add_option("--long-edge-factor", longEdgeFactor, "re-enclosure trigger factor");
    solve->add_option("--s-override", sOverride, "override the step parameter s");
    solve->add_option("--trace", tracePath, "write the CSV step trace here");
    solve->add_flag("--json", json, "emit the outcome as JSON");
    solve->add_flag("--witness-center", witnessCenter, "return vbar/(n+1) instead of vbar");

    // gen
    std::string kind = "random", genOutput;
    std::size_t genN = 2, genM = 4;
    unsigned genBits = 3;
    std::uint64_t genSeed = 1;
    bool genJson = false;
    auto* gen = app.add_subcommand("gen", "generate a test instance");
    gen->add_option("--kind", kind, "feasible|infeasible|random|stress-edge")
        ->check(CLI::IsMember({"feasible", "infeasible", "random", "stress-edge"}));
    gen->add_option("--n", genN, "dimension")->required();
    gen->add_option("--m", genM, "row count")->required();
    gen->add_option("--bits", genBits, "entry bit width");
    gen->add_option("--seed", genSeed, "RNG seed");
    gen->add_option("--output", genOutput, "output path (default stdout)");
    gen->add_flag("--json", genJson, "emit the JSON system format");

    // verify
    std::string vSystem, vWitness, vCert;
    bool vReference = false;
    auto* verify = app.add_subcommand("verify", "verify a witness or certificate");
    verify->add_option("--system", vSystem, "system file")->required();
    verify->add_option("--witness", vWitness, "witness JSON file");
    verify->add_option("--cert", vCert, "certificate JSON file");
    verify->add_flag("--reference", vReference, "also run the Fourier-Motzkin reference");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return run_solve(input, oracleKind, center, radius, mode, sigFactor, maxStepsFactor,
                             longEdgeFactor, sOverride, tracePath, json, witnessCenter);
        if (gen->parsed()) return run_gen(kind, genN, genM, genBits, genSeed, genOutput, genJson);
        if (verify->parsed()) return run_verify(vSystem, vWitness, vCert, vReference);
    } catch (const dma::InvariantBreach& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInvariantBreach;
    } catch (const dma::VerificationFailed& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInvariantBreach;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}
