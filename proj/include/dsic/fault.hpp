#pragma once

namespace dsic {

// Verification fault hooks. `dsic verify --inject <kind>` flips one of these
// before running the check suite; the suite must then fail at the matching
// named check. Never active in normal operation.
enum class Fault {
  None,
  BilinearKernel,        // perturbs one interpolation weight in the production kernel
  SoftmaxNormalization,  // breaks the sum-to-one property of grouped softmax
  DetachedGradient,      // drops one operand's gradient in hadamard backward
};

void set_fault(Fault f);
Fault active_fault();

}  // namespace dsic
