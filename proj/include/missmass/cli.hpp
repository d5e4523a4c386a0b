#pragma once

// Config-driven runner: validation, dispatch, records and rendering.
#include "missmass/cli/app.hpp"
#include "missmass/cli/config.hpp"
#include "missmass/cli/record.hpp"
#include "missmass/cli/report.hpp"
#include "missmass/cli/run.hpp"
