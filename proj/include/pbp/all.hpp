#pragma once

#include "pbp/brightness.hpp"
#include "pbp/downsample.hpp"
#include "pbp/error.hpp"
#include "pbp/estimators.hpp"
#include "pbp/eval.hpp"
#include "pbp/filters.hpp"
#include "pbp/image.hpp"
#include "pbp/image_io.hpp"
#include "pbp/pbp.hpp"
