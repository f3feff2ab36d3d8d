#pragma once

#define LAMBEC_VERSION "0.1.0"
