#pragma once

namespace scoreforge {

// Full command dispatch. Returns the process exit code: 0 on success, 2 on
// usage errors, 1 on any module error (printed as one machine-parsable
// "error: <kind>: <message>" line on stderr).
int cli_main(int argc, char** argv);

}  // namespace scoreforge
