#include "fxa/assembler.hpp"
#include "fxa/batch.hpp"
#include "fxa/codegen.hpp"
#include "fxa/oracle.hpp"
#include "fxa/parser.hpp"
#include "fxa/stats.hpp"
#include "fxa/typecheck.hpp"
#include "fxa/vm.hpp"
#include "fxa/wordops.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fxa;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
}

std::uint64_t env_key_seed() {
    if (const char* e = std::getenv("FXA_KEY_SEED")) return std::stoull(e);
    return 1;
}

// Parse one CLI argument according to the scheduled parameter type.
std::uint64_t parse_arg(const std::string& type_name, const std::string& text, int width) {
    if (type_name == "float")
        return wordops::fencode(std::stod(text), width);
    if (type_name == "double")
        return wordops::fencode(std::stod(text), 2 * width);
    std::int64_t v = std::stoll(text, nullptr, 0);
    return static_cast<std::uint64_t>(v);
}

// Render a deoffset output value according to the return type.
std::string format_ret(const std::string& type_name, std::uint64_t value, int width,
                       int cells) {
    if (type_name == "float") {
        std::ostringstream o;
        o << wordops::fdecode(value, width);
        return o.str();
    }
    if (type_name == "double") {
        std::ostringstream o;
        o << wordops::fdecode(value, 2 * width);
        return o.str();
    }
    bool uns = type_name.rfind("unsigned", 0) == 0 || type_name == "_Bool";
    if (uns) return std::to_string(value);
    return std::to_string(wordops::to_signed(value, cells * width));
}

int cmd_compile(const std::string& src_path, std::uint64_t seed, int width,
                const std::string& mode, const std::string& out,
                const std::string& entry, std::uint64_t key_seed, bool zero) {
    Key key(key_seed, key_seed ^ 0xabcdef, width);
    TypedUnit unit = typecheck_source(read_file(src_path), src_path);
    CodegenOptions opts;
    opts.width = width;
    opts.seed = seed;
    opts.zero_offsets = zero;
    opts.entry = entry;
    auto am = array_mode_by_name(mode);
    if (!am) throw std::runtime_error("bad --array-mode");
    opts.array_mode = *am;
    ObjectProgram prog = compile_unit(unit, key, opts);
    write_file(out, save_object(prog, key));
    std::cout << "wrote " << out << " (" << prog.code.size() << " instructions)\n";
    return 0;
}

int cmd_run(const std::string& obj_path, const std::vector<std::string>& arg_texts,
            std::uint64_t key_seed, const std::string& trace_path, bool oracle_mode,
            const std::string& source_override, std::uint64_t budget) {
    // width read from the object header
    std::string text = read_file(obj_path);
    int width = 32;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("WIDTH ", 0) == 0) { width = std::stoi(line.substr(6)); break; }
        }
    }
    Key key(key_seed, key_seed ^ 0xabcdef, width);
    ObjectProgram prog = load_object(text, key);

    std::vector<std::uint64_t> args;
    std::vector<const IfaceEntry*> params;
    for (const IfaceEntry& e : prog.iface)
        if (e.kind == IfaceEntry::Kind::Param) params.push_back(&e);
    if (arg_texts.size() != params.size())
        throw std::runtime_error("expected " + std::to_string(params.size()) + " arguments");
    for (size_t i = 0; i < params.size(); ++i)
        args.push_back(parse_arg(params[i]->type_name, arg_texts[i], width));

    if (oracle_mode) {
        std::string src_path = source_override.empty() ? prog.source_name : source_override;
        TypedUnit unit = typecheck_source(read_file(src_path), src_path);
        // entry: the function whose index matches the object entry; recompile
        // metadata does not retain it, so take the last function by default
        OracleResult res = interpret(unit, unit.unit.functions.back().name, args, width, budget);
        if (res.faulted) {
            std::cout << "fault: " << oracle_fault_name(res.fault) << "\n";
            return 3;
        }
        const IfaceEntry* ret = nullptr;
        for (const IfaceEntry& e : prog.iface)
            if (e.kind == IfaceEntry::Kind::Ret) ret = &e;
        std::cout << format_ret(ret ? ret->type_name : "int", res.value, width,
                                ret && ret->offsets.size() == 2 ? 2 : 1)
                  << "\n";
        return 0;
    }

    RunOptions opts;
    opts.step_budget = budget;
    opts.record_trace = !trace_path.empty();
    RunResult res = run_program(prog, key, args, opts);
    if (!trace_path.empty()) write_file(trace_path, save_trace(res.trace, key));
    if (res.faulted) {
        std::cout << "fault: " << fault_name(res.fault) << "\n";
        return 3;
    }
    const IfaceEntry* ret = nullptr;
    for (const IfaceEntry& e : prog.iface)
        if (e.kind == IfaceEntry::Kind::Ret) ret = &e;
    std::cout << format_ret(ret ? ret->type_name : "int", res.ret_value, width,
                            ret && ret->offsets.size() == 2 ? 2 : 1)
              << "\n";
    return 0;
}

int cmd_batch(const std::string& src_path, const std::string& entry, int width,
              const std::string& mode, std::uint64_t key_seed, std::uint64_t seed_begin,
              std::uint32_t count, const std::vector<std::string>& arg_texts,
              const std::string& out_dir, bool serial) {
    TypedUnit unit = typecheck_source(read_file(src_path), src_path);
    BatchConfig cfg;
    cfg.width = width;
    auto am = array_mode_by_name(mode);
    if (!am) throw std::runtime_error("bad --array-mode");
    cfg.array_mode = *am;
    cfg.entry = entry;
    cfg.key_lo = key_seed;
    cfg.key_hi = key_seed ^ 0xabcdef;
    cfg.seed_begin = seed_begin;
    cfg.count = count;
    for (const std::string& t : arg_texts) cfg.args.push_back(parse_arg("int", t, width));

    BatchResult res = run_batch(unit, cfg, !serial);
    if (!res.shapes_ok)
        throw std::runtime_error("shape mismatch at seed " +
                                 std::to_string(seed_begin + res.first_bad_seed));

    fs::create_directories(out_dir);
    Key key(cfg.key_lo, cfg.key_hi, width);
    write_file(out_dir + "/nominal.fxo", save_object(res.nominal_object, key));
    write_file(out_dir + "/nominal.trc", save_trace(res.nominal_trace, key));
    {
        std::ostringstream meta;
        meta << "WIDTH " << width << "\n"
             << "MODE " << array_mode_name(cfg.array_mode) << "\n"
             << "ROWS " << res.rows << "\n"
             << "COLS " << res.cols << "\n"
             << "SEED_BEGIN " << seed_begin << "\n";
        write_file(out_dir + "/meta.txt", meta.str());
    }
    {
        std::ostringstream pts;
        for (size_t i = 0; i < res.points.size(); ++i) {
            const PointInfo& p = res.points[i];
            pts << i << " " << p.pc << " " << op_info(p.op).name << " "
                << (p.is_input ? "input" : "write") << " " << std::hex << p.nominal
                << std::dec << "\n";
        }
        write_file(out_dir + "/points.txt", pts.str());
    }
    {
        std::string blob(reinterpret_cast<const char*>(res.deltas.data()),
                         res.deltas.size() * sizeof(std::uint32_t));
        write_file(out_dir + "/deltas.bin", blob);
    }
    {
        std::ostringstream dd;
        for (size_t b = 0; b < res.branch_pcs.size(); ++b) {
            std::uint64_t ones = 0;
            for (size_t r = 0; r < res.rows; ++r) ones += res.diddles[r][b];
            dd << res.branch_pcs[b] << " " << op_info(res.nominal_object.code[res.branch_pcs[b]].op).name
               << " " << ones << "/" << res.rows << "\n";
        }
        write_file(out_dir + "/diddles.txt", dd.str());
    }
    std::cout << "batch ok: " << res.rows << " recompilations, " << res.cols
              << " delta points, shapes equal\n";
    return 0;
}

int cmd_analyze(const std::string& dir, double alpha, bool adversary,
                const std::vector<std::string>& trace_paths, std::uint64_t key_seed) {
    if (adversary) {
        // keyless check over trace files: every non-ciphertext field must
        // agree across traces
        if (trace_paths.size() < 2) throw std::runtime_error("need at least two traces");
        std::vector<std::vector<std::string>> rows;
        for (const std::string& p : trace_paths) {
            std::vector<std::string> lines;
            std::istringstream in(read_file(p));
            std::string line;
            while (std::getline(in, line)) lines.push_back(line);
            rows.push_back(std::move(lines));
        }
        auto structural = [](const std::string& line) {
            // strip the trailing ciphertext hex of W/I records; B records are
            // fully structural
            std::istringstream ls(line);
            std::string tag;
            ls >> tag;
            if (tag == "B") return line;
            std::string rest = line;
            auto pos = rest.find_last_of(' ');
            std::string dest = rest.substr(0, pos);
            // memory destinations are ciphertext too
            auto dpos = dest.find_last_of(' ');
            if (dest.compare(dpos + 1, 2, "m:") == 0) dest = dest.substr(0, dpos + 1) + "m:*";
            return dest;
        };
        for (size_t t = 1; t < rows.size(); ++t) {
            if (rows[t].size() != rows[0].size())
                { std::cout << "SHAPE fail: trace lengths differ\n"; return 4; }
            for (size_t i = 0; i < rows[0].size(); ++i) {
                if (structural(rows[t][i]) != structural(rows[0][i])) {
                    std::cout << "SHAPE fail at line " << i << "\n";
                    return 4;
                }
            }
        }
        std::cout << "SHAPE pass: " << rows.size()
                  << " traces structurally identical (ciphertext fields excluded)\n";
        return 0;
    }

    // keyed analysis over a batch directory
    std::string meta = read_file(dir + "/meta.txt");
    int width = 8;
    std::size_t rows = 0, cols = 0;
    {
        std::istringstream in(meta);
        std::string k;
        while (in >> k) {
            if (k == "WIDTH") in >> width;
            else if (k == "ROWS") in >> rows;
            else if (k == "COLS") in >> cols;
            else { std::string skip; in >> skip; }
        }
    }
    std::string blob = read_file(dir + "/deltas.bin");
    std::vector<std::uint32_t> deltas(rows * cols);
    std::memcpy(deltas.data(), blob.data(), blob.size());

    Key key(key_seed, key_seed ^ 0xabcdef, width);
    ObjectProgram prog = load_object(read_file(dir + "/nominal.fxo"), key);

    std::ostringstream rep;
    int bins = 1 << width;
    int pass = 0, fail = 0;
    if (rows >= static_cast<std::size_t>(5 * bins)) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::vector<std::uint32_t> col(rows);
            for (std::size_t r = 0; r < rows; ++r) col[r] = deltas[r * cols + c];
            Chi2Result u = uniformity_test(col, bins, alpha);
            rep << "POINT " << c << " - uniformity " << u.statistic << " "
                << (u.pass ? "pass" : "fail") << "\n";
            (u.pass ? pass : fail)++;
        }
    } else {
        rep << "# too few rows for per-point uniformity; shape and budget only\n";
    }
    rep << "SUMMARY points=" << cols << " uniform_pass=" << pass << " uniform_fail=" << fail
        << "\n";
    write_file(dir + "/report.txt", rep.str());
    std::cout << rep.str();
    return fail == 0 ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"obfuscating compiler, emulator and trace analyzer for the FxA target"};
    app.require_subcommand(1);

    // compile
    auto* c = app.add_subcommand("compile", "compile a source file to an object");
    std::string c_src, c_out = "out.fxo", c_mode = "per-entry", c_entry;
    std::uint64_t c_seed = 1, c_key = env_key_seed();
    int c_width = 32;
    bool c_zero = false;
    c->add_option("src", c_src)->required();
    c->add_option("--seed", c_seed);
    c->add_option("--width", c_width)->check(CLI::IsMember({4, 8, 16, 32}));
    c->add_option("--array-mode", c_mode);
    c->add_option("-o,--output", c_out);
    c->add_option("--entry", c_entry);
    c->add_option("--key-seed", c_key);
    c->add_flag("--zero-offsets", c_zero);

    // run
    auto* r = app.add_subcommand("run", "run an object (or its source on the interpreter)");
    std::string r_obj, r_trace, r_source;
    std::vector<std::string> r_args;
    std::uint64_t r_key = env_key_seed(), r_budget = 50'000'000;
    bool r_oracle = false;
    r->add_option("obj", r_obj)->required();
    r->add_option("args", r_args);
    r->add_option("--key-seed", r_key);
    r->add_option("--trace", r_trace);
    r->add_flag("--oracle", r_oracle);
    r->add_option("--source", r_source);
    r->add_option("--budget", r_budget);

    // batch
    auto* b = app.add_subcommand("batch", "recompile+run sweep, saving delta artifacts");
    std::string b_src, b_entry, b_mode = "per-entry", b_out = "batch-out";
    std::vector<std::string> b_args;
    std::uint64_t b_key = env_key_seed(), b_seed = 1;
    std::uint32_t b_count = 100;
    int b_width = 8;
    bool b_serial = false;
    b->add_option("--source", b_src)->required();
    b->add_option("--entry", b_entry);
    b->add_option("--width", b_width)->check(CLI::IsMember({4, 8, 16, 32}));
    b->add_option("--array-mode", b_mode);
    b->add_option("--key-seed", b_key);
    b->add_option("--seed-begin", b_seed);
    b->add_option("--count", b_count);
    b->add_option("--args", b_args);
    b->add_option("--out", b_out);
    b->add_flag("--serial", b_serial);

    // analyze
    auto* a = app.add_subcommand("analyze", "statistical report over batch artifacts");
    std::string a_dir;
    double a_alpha = 0.001;
    bool a_adv = false;
    std::vector<std::string> a_traces;
    std::uint64_t a_key = env_key_seed();
    a->add_option("--batch", a_dir);
    a->add_option("--alpha", a_alpha);
    a->add_flag("--adversary", a_adv);
    a->add_option("--traces", a_traces);
    a->add_option("--key-seed", a_key);

    // report
    auto* p = app.add_subcommand("report", "print a saved analysis report");
    std::string p_dir;
    p->add_option("--batch", p_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c->parsed())
            return cmd_compile(c_src, c_seed, c_width, c_mode, c_out, c_entry, c_key, c_zero);
        if (r->parsed())
            return cmd_run(r_obj, r_args, r_key, r_trace, r_oracle, r_source, r_budget);
        if (b->parsed())
            return cmd_batch(b_src, b_entry, b_width, b_mode, b_key, b_seed, b_count, b_args,
                             b_out, b_serial);
        if (a->parsed())
            return cmd_analyze(a_dir, a_alpha, a_adv, a_traces, a_key);
        if (p->parsed()) {
            std::cout << read_file(p_dir + "/report.txt");
            return 0;
        }
    } catch (const FrontendError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
