#pragma once

// Everything except the HTTP polisher (fieldlang/polisher.hpp), which pulls in
// cpp-httplib and needs a thread library.

#include "fieldlang/error.hpp"
#include "fieldlang/field.hpp"
#include "fieldlang/serialize.hpp"
#include "fieldlang/field_io.hpp"
#include "fieldlang/features.hpp"
#include "fieldlang/synth.hpp"
#include "fieldlang/codec.hpp"
#include "fieldlang/png.hpp"
#include "fieldlang/langgen.hpp"
#include "fieldlang/bench.hpp"
