#include "ooc/chain_file.hpp"

#include <fstream>

#include "json.hpp"

namespace ooc {

namespace {

using nlohmann::json;

Extent extent_from_json(const json& j) {
  if (!j.contains("lo") || !j.contains("hi"))
    throw ValidationError("extent needs 'lo' and 'hi' arrays");
  const auto& lo = j["lo"];
  const auto& hi = j["hi"];
  if (lo.size() != hi.size() || lo.empty() || lo.size() > 3)
    throw ValidationError("extent arrays must have matching rank 1..3");
  Point plo{0, 0, 0}, phi{1, 1, 1};
  for (size_t d = 0; d < lo.size(); ++d) {
    plo[d] = lo[d].get<index_t>();
    phi[d] = hi[d].get<index_t>();
  }
  return Extent::make(static_cast<int>(lo.size()), plo, phi);
}

Point halo_from_json(const json& j, int ndim) {
  Point h{0, 0, 0};
  if (j.is_number_integer()) {
    for (int d = 0; d < ndim; ++d) h[d] = j.get<index_t>();
  } else if (j.is_array()) {
    if (static_cast<int>(j.size()) != ndim)
      throw ValidationError("halo array rank does not match the core extent");
    for (int d = 0; d < ndim; ++d) h[d] = j[d].get<index_t>();
  } else {
    throw ValidationError("halo must be an integer or an array");
  }
  return h;
}

AccessMode mode_from_string(const std::string& s) {
  if (s == "READ") return AccessMode::read;
  if (s == "WRITE") return AccessMode::write;
  if (s == "READ_WRITE") return AccessMode::read_write;
  throw ValidationError("unknown access mode '" + s + "'");
}

ReduceOp reduce_from_string(const std::string& s) {
  if (s == "SUM") return ReduceOp::sum;
  if (s == "MIN") return ReduceOp::min;
  if (s == "MAX") return ReduceOp::max;
  throw ValidationError("unknown reduction op '" + s + "'");
}

}  // namespace

ChainFileResult load_chain_json(Runtime& rt, const std::string& json_text) {
  json doc = json::parse(json_text);
  ChainFileResult res;

  for (const auto& jd : doc.value("datasets", json::array())) {
    std::string name = jd.at("name").get<std::string>();
    Extent core = extent_from_json(jd.at("core"));
    Point halo = jd.contains("halo") ? halo_from_json(jd["halo"], core.ndim) : Point{0, 0, 0};
    index_t elem_bytes = jd.value("elem_bytes", static_cast<index_t>(8));
    DatasetId id;
    const json& fill = jd.contains("fill") ? jd["fill"] : json(0.0);
    if (fill.is_number()) {
      id = rt.declare(name, core, halo, elem_bytes, fill.get<double>());
    } else if (fill.is_string()) {
      ExprPtr e = parse_prefix_expr(fill.get<std::string>(), /*allow_coords=*/true);
      ExprTape tape = ExprTape::compile(e);
      id = rt.declare(name, core, halo, elem_bytes, [tape](Point p) {
        // coordinate-only expressions evaluate with a tiny stack walk
        double stack[32];
        int sp = 0;
        for (const auto& in : tape.ins) {
          switch (in.op) {
            case ExprOp::constant:
              stack[sp++] = in.value;
              break;
            case ExprOp::coord:
              stack[sp++] = static_cast<double>(p[in.arg]);
              break;
            case ExprOp::read:
              throw ValidationError("fill expressions cannot read datasets");
            case ExprOp::add:
              --sp;
              stack[sp - 1] += stack[sp];
              break;
            case ExprOp::sub:
              --sp;
              stack[sp - 1] -= stack[sp];
              break;
            case ExprOp::mul:
              --sp;
              stack[sp - 1] *= stack[sp];
              break;
            case ExprOp::divide:
              --sp;
              stack[sp - 1] /= stack[sp];
              break;
            case ExprOp::min:
              --sp;
              stack[sp - 1] = std::min(stack[sp - 1], stack[sp]);
              break;
            case ExprOp::max:
              --sp;
              stack[sp - 1] = std::max(stack[sp - 1], stack[sp]);
              break;
          }
        }
        return stack[0];
      });
    } else {
      throw ValidationError("dataset fill must be a number or an expression string");
    }
    res.datasets[name] = id;
  }

  std::map<std::string, Stencil> stencils;
  stencils["point"] = Stencil::point();
  for (const auto& js : doc.value("stencils", json::array())) {
    Stencil s;
    for (const auto& jo : js.at("offsets")) {
      Point off{0, 0, 0};
      for (size_t d = 0; d < jo.size() && d < 3; ++d) off[d] = jo[d].get<index_t>();
      s.offsets.push_back(off);
    }
    stencils[js.at("name").get<std::string>()] = s;
  }

  for (const auto& jl : doc.value("loops", json::array())) {
    ParLoop loop;
    loop.range = extent_from_json(jl.at("range"));
    for (const auto& ja : jl.at("args")) {
      std::string dname = ja.at("dataset").get<std::string>();
      DatasetId d = rt.mesh().find(dname);
      if (d < 0) throw ValidationError("loop argument names unknown dataset '" + dname + "'");
      std::string sname = ja.at("stencil").get<std::string>();
      auto sit = stencils.find(sname);
      if (sit == stencils.end())
        throw ValidationError("loop argument names unknown stencil '" + sname + "'");
      loop.args.push_back({d, sit->second, mode_from_string(ja.at("mode").get<std::string>())});
    }
    const json& jk = jl.at("kernel");
    const json writes = jk.value("writes", json::object());
    for (const auto& [arg_str, expr_str] : writes.items())
      loop.kernel.writes.push_back(
          {std::stoi(arg_str), parse_prefix_expr(expr_str.get<std::string>())});
    if (jk.contains("reduction")) {
      const json& jr = jk["reduction"];
      loop.kernel.reduce = reduce_from_string(jr.at("op").get<std::string>());
      loop.kernel.reduce_expr = parse_prefix_expr(jr.at("expr").get<std::string>());
      loop.kernel.reduce_name = jr.at("name").get<std::string>();
    }
    rt.enqueue_loop(std::move(loop));
    ++res.loops_enqueued;
  }
  return res;
}

ChainFileResult load_chain_file(Runtime& rt, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open chain file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_chain_json(rt, text);
}

}  // namespace ooc
