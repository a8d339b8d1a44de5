#pragma once

namespace ncal {

// Entry point behind the ncal binary; exposed so tests can drive the
// command surface in-process. Returns 0 on success, 1 on usage errors,
// 2 on data errors.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace ncal
