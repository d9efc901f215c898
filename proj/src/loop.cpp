#include "ooc/loop.hpp"

#include <limits>

namespace ooc {

namespace {

void check_reads(const Mesh& mesh, const ParLoop& loop, const ExprPtr& e,
                 const std::string& where) {
  expr_visit(e, [&](const Expr& node) {
    if (node.op == ExprOp::coord)
      throw ValidationError("coordinate terms are only valid in fill expressions (" + where + ")");
    if (node.op != ExprOp::read) return;
    if (node.arg < 0 || node.arg >= static_cast<int>(loop.args.size()))
      throw ValidationError(where + " reads argument " + std::to_string(node.arg) +
                            " which does not exist");
    const LoopArg& a = loop.args[node.arg];
    if (!access_reads(a.mode))
      throw ValidationError(where + " reads argument " + std::to_string(node.arg) + " (dataset '" +
                            mesh[a.dataset].name + "') declared WRITE");
    if (!a.stencil.has_offset(node.offset))
      throw ValidationError(where + " reads dataset '" + mesh[a.dataset].name + "' at offset (" +
                            std::to_string(node.offset[0]) + "," + std::to_string(node.offset[1]) +
                            "," + std::to_string(node.offset[2]) +
                            ") which is not in the declared stencil");
  });
}

}  // namespace

void validate_loop(const Mesh& mesh, ParLoop& loop) {
  if (loop.range.empty()) throw ValidationError("loop has an empty iteration range");
  if (loop.args.empty() && loop.kernel.writes.empty() && !loop.has_reduction())
    throw ValidationError("loop has no arguments and no reduction");

  for (const auto& a : loop.args) {
    if (a.dataset < 0 || a.dataset >= static_cast<int>(mesh.datasets.size()))
      throw ValidationError("loop argument names an unknown dataset");
    if (a.stencil.offsets.empty()) throw ValidationError("loop argument has an empty stencil");
    const Dataset& ds = mesh[a.dataset];
    if (loop.range.ndim != ds.core.ndim)
      throw ValidationError("loop rank does not match dataset '" + ds.name + "'");
    for (const auto& off : a.stencil.offsets)
      for (int d = ds.core.ndim; d < 3; ++d)
        if (off[d] != 0)
          throw ValidationError("stencil offset uses a dimension beyond the rank of '" + ds.name +
                                "'");

    if (access_writes(a.mode)) {
      if (!a.stencil.is_point())
        throw ValidationError("write access to '" + ds.name +
                              "' must use the single zero-offset stencil");
      if (!ds.core.contains(loop.range))
        throw ValidationError("loop range " + loop.range.str() + " exceeds the core " +
                              ds.core.str() + " of written dataset '" + ds.name + "'");
    }
    if (access_reads(a.mode)) {
      auto [elo, ehi] = stencil_extents(a.stencil);
      Extent reach = loop.range.expand(elo, ehi);
      if (!ds.alloc().contains(reach))
        throw ValidationError("loop reads " + reach.str() + " of dataset '" + ds.name +
                              "' which exceeds its allocation " + ds.alloc().str());
    }
  }

  // A written dataset must appear in exactly one argument; reading it
  // through another argument would make point order observable.
  for (size_t i = 0; i < loop.args.size(); ++i) {
    if (!access_writes(loop.args[i].mode)) continue;
    for (size_t k = 0; k < loop.args.size(); ++k)
      if (k != i && loop.args[k].dataset == loop.args[i].dataset)
        throw ValidationError("dataset '" + mesh[loop.args[i].dataset].name +
                              "' is written and appears in another argument of the same loop");
  }

  std::vector<bool> written_arg(loop.args.size(), false);
  for (const auto& w : loop.kernel.writes) {
    if (w.arg < 0 || w.arg >= static_cast<int>(loop.args.size()))
      throw ValidationError("kernel writes argument " + std::to_string(w.arg) +
                            " which does not exist");
    if (!access_writes(loop.args[w.arg].mode))
      throw ValidationError("kernel writes argument " + std::to_string(w.arg) +
                            " declared READ");
    if (written_arg[w.arg])
      throw ValidationError("kernel writes argument " + std::to_string(w.arg) + " twice");
    written_arg[w.arg] = true;
    check_reads(mesh, loop, w.expr, "write expression");
  }
  for (size_t i = 0; i < loop.args.size(); ++i)
    if (access_writes(loop.args[i].mode) && !written_arg[i])
      throw ValidationError("argument " + std::to_string(i) + " (dataset '" +
                            mesh[loop.args[i].dataset].name +
                            "') is declared writable but the kernel never writes it");

  if (loop.has_reduction()) {
    if (!loop.kernel.reduce_expr) throw ValidationError("reduction without an expression");
    if (loop.kernel.reduce_name.empty()) throw ValidationError("reduction without a name");
    check_reads(mesh, loop, loop.kernel.reduce_expr, "reduction expression");
  }

  loop.write_tapes.clear();
  for (const auto& w : loop.kernel.writes) loop.write_tapes.push_back(ExprTape::compile(w.expr));
  if (loop.has_reduction()) loop.reduce_tape = ExprTape::compile(loop.kernel.reduce_expr);
}

}  // namespace ooc
